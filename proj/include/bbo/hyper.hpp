#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbo/gp.hpp"
#include "bbo/kernel.hpp"

namespace bbo {

// The kernel structure whose hyperparameters are being selected: base kind,
// additive or not, and the captured domain / fidelity spaces.
struct KernelFamily {
  KernelKind base = KernelKind::Matern25;
  bool additive = false;
  int p_max = 6;       // cap on the additive group size (clamped to d)
  int k_decomps = 25;  // random decompositions per group size in the MML path
  Domain domain;
  std::optional<FidelitySpace> fidelity;
  KernelKind fid_kind = KernelKind::ExpDecay;
  // When set, the decomposition is not varied by either selection path.
  std::optional<Decomposition> fixed_decomposition;

  static KernelFamily plain(KernelKind base, Domain domain,
                            std::optional<FidelitySpace> fidelity = std::nullopt,
                            KernelKind fid_kind = KernelKind::ExpDecay);
  static KernelFamily make_additive(KernelKind base, Domain domain, int p_max = 6,
                                    int k_decomps = 25,
                                    std::optional<FidelitySpace> fidelity = std::nullopt,
                                    KernelKind fid_kind = KernelKind::ExpDecay);

  int fid_dim() const { return fidelity ? fidelity->dim() : 0; }
  int effective_p_max() const;
  // Builds the kernel spec; additive families need a decomposition.
  KernelSpec spec(const std::optional<Decomposition>& dec) const;
};

// One continuous hyperparameter's slot and search interval. lo == hi pins the
// value (degenerate bounds are skipped by both optimizer and sampler).
struct HyperParamRange {
  enum class Slot { Lengthscale, HamWeight, FidScale, Scale, NoiseVar };
  std::string name;
  Slot slot = Slot::Scale;
  int index = 0;  // coordinate index for per-coordinate slots
  double lo = 0.0, hi = 1.0;
  bool log_scale = true;

  double from_unit(double u) const;
  bool fixed() const { return !(hi > lo); }
};

struct HyperBounds {
  std::vector<HyperParamRange> params;

  int size() const { return static_cast<int>(params.size()); }
  KernelHyperparams hp_from_unit(const KernelFamily& family, const Eigen::VectorXd& unit) const;
};

// Scale-free default ranges: lengthscales log-uniform in [1e-2 w, 10 w] per
// coordinate range w, the kernel scale log-uniform around the empirical
// observation variance, and the noise variance log-uniform below it.
HyperBounds build_hyper_bounds(const KernelFamily& family, const Eigen::VectorXd& y);

struct HyperChoice {
  KernelHyperparams hp;
  std::optional<Decomposition> decomposition;
};

enum class HpStrategy { Mml, Sfp };

const char* hp_strategy_name(HpStrategy s);

// State of the randomized MML / SFP selection: the current likelihood optimum,
// the FIFO queue of posterior samples and the pair of strategy weights.
struct HyperState {
  HyperChoice theta_mml;
  std::deque<HyperChoice> queue;
  double w_mml = 1.0, w_sfp = 1.0;
  int n_cyc = 17;
  bool initialized = false;
};

// Marginal-likelihood evaluator with per-pair caches over a fixed data set
// (coordinate squared differences, label matches, fidelity terms). Not safe
// for concurrent use of one instance. Observations are centered at their mean.
class MllEvaluator {
 public:
  MllEvaluator(const KernelFamily& family, std::vector<GPInput> inputs, Eigen::VectorXd y);
  ~MllEvaluator();
  MllEvaluator(MllEvaluator&&) noexcept;

  // Log marginal likelihood (0 for empty data, -inf where the system is not
  // positive definite).
  double eval(const KernelHyperparams& hp, const std::optional<Decomposition>& dec) const;
  int n() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct MmlCandidate {
  Decomposition decomposition;
  double mll = 0.0;  // best value seen while optimizing this candidate
};
struct MmlReport {
  std::vector<MmlCandidate> candidates;
};

// Maximizes the marginal likelihood over the bounds with dividing rectangles.
// For additive families the decomposition is partially maximized: k random
// decompositions per group size p in {1..p_max}, continuous hyperparameters
// optimized for each, best likelihood kept (then re-optimized harder).
HyperChoice maximize_mll(const std::vector<GPInput>& inputs, const Eigen::VectorXd& y,
                         const KernelFamily& family, const HyperBounds& bounds, Rng& rng,
                         MmlReport* report = nullptr);

// Gibbs chain over the hyperparameter box with target exp(MLL) under a
// uniform prior: slice sampling per continuous coordinate, Metropolis-
// Hastings with the prior proposal for the decomposition. Exposed for
// invariance tests; gibbs_sample_posterior drives it.
class GibbsChain {
 public:
  GibbsChain(const KernelFamily& family, const HyperBounds& bounds,
             std::vector<GPInput> inputs, Eigen::VectorXd y);

  void tick(Rng& rng);   // one single-hyperparameter update
  void sweep(Rng& rng);  // one randomized full scan
  HyperChoice current(const KernelFamily& family) const;
  const Eigen::VectorXd& unit() const { return unit_; }
  void set_unit(const Eigen::VectorXd& unit);

 private:
  void update_coordinate(int k, Rng& rng);
  void update_decomposition(Rng& rng);
  double log_target(const Eigen::VectorXd& unit, const std::optional<Decomposition>& dec) const;

  const KernelFamily* family_;
  HyperBounds bounds_;
  MllEvaluator evaluator_;
  std::vector<int> free_params_;
  bool has_decomposition_ = false;
  Eigen::VectorXd unit_;
  std::optional<Decomposition> dec_;
  double cached_log_target_ = 0.0;
  std::vector<int> scan_order_;
  std::size_t scan_pos_ = 0;
};

// `count` posterior samples: burn-in of 1000 single-hyperparameter updates,
// then one sample kept every 100 updates.
std::vector<HyperChoice> gibbs_sample_posterior(const std::vector<GPInput>& inputs,
                                                const Eigen::VectorXd& y,
                                                const KernelFamily& family,
                                                const HyperBounds& bounds, int count, Rng& rng);

// k decompositions, each from a uniform group-size cap p in {1..p_max} and a
// uniformly shuffled coordinate ordering.
std::vector<Decomposition> sample_decompositions(int d, int p_max, int k, Rng& rng);

struct HpDraw {
  HpStrategy strategy = HpStrategy::Mml;
  bool fallback = false;  // SFP drawn with an empty queue falls back to MML
  HyperChoice theta;
};

// Picks MML with probability w_mml / (w_mml + w_sfp), otherwise pops the next
// posterior sample (falling back to MML when the queue is empty).
HpDraw choose_hp(HyperState& state, Rng& rng);

// Recomputes theta_mml and refills the queue with n_cyc posterior samples;
// weights are preserved.
void refresh_hyper_state(HyperState& state, const std::vector<GPInput>& inputs,
                         const Eigen::VectorXd& y, const KernelFamily& family, Rng& rng,
                         MmlReport* report = nullptr);

}  // namespace bbo
