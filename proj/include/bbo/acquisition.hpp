#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bbo/acq_opt.hpp"
#include "bbo/gp.hpp"

namespace bbo {

enum class AcqKind { Ucb, Ei, Pi, Ts, Ttei, AddUcb };

const char* acq_kind_name(AcqKind kind);
AcqKind acq_kind_from_name(const std::string& name);

// Exploration coefficient beta_t = 0.5 * d * log(2t + 1); nondecreasing in
// both the step count and the dimension.
double ucb_beta(long t, int d);

// Adaptive acquisition selection state: enabled acquisitions with sampling
// weights, the step counter and the incumbent value.
struct AcqState {
  std::vector<AcqKind> enabled;
  std::vector<double> weights;
  long step = 1;
  double incumbent = -std::numeric_limits<double>::infinity();
  double initial_weight = 1.0;  // gamma_0

  static AcqState make(std::vector<AcqKind> kinds, double initial_weight = 1.0);
  std::size_t index_of(AcqKind kind) const;  // throws UnknownLabel
};

// UCB, EI, TS, TTEI; Add-GP-UCB joins for entirely euclidean domains without
// constraints (its per-group maximization cannot honor joint constraints).
// PI is opt-in.
std::vector<AcqKind> default_acquisitions(const Domain& domain);

// Per-optimization-call scratch: the lazily extended posterior sample for TS
// and the reference maximizer for TTEI. One context must not outlive the
// optimization call that created it.
struct AcqContext {
  std::optional<ThompsonSample> ts;
  bool ttei_plain = false;           // with probability 1/2, plain EI ranking
  std::optional<GPInput> ttei_ref;   // x1: the EI maximizer
  double ttei_ref_mean = 0.0;
  double ttei_ref_var = 0.0;
};

// Pointwise acquisition value. TS and TTEI need the context; AddUcb has no
// pointwise value (use addgpucb_next).
double acq_value(AcqKind kind, const GPModel& gp, const GPInput& q, const AcqState& state,
                 AcqContext* ctx = nullptr);

// Samples a label with probability proportional to its weight.
AcqKind choose_acquisition(const AcqState& state, Rng& rng);

// Adds 1 to the used label's weight when the evaluation improved on the
// incumbent; otherwise leaves all weights unchanged.
void update_weights(AcqState& state, AcqKind used, bool improved);

// Maximizes each additive component's upper confidence bound separately on
// its group sub-domain and concatenates the winners.
Point addgpucb_next(const GPModel& gp, const AcqState& state, const Domain& domain,
                    const AcqOptPolicy& policy, Rng& rng,
                    const std::optional<FidelityPoint>& slice_fid = std::nullopt);

// Maximizes the chosen acquisition over the domain. In multi-fidelity mode
// slice_fid pins every posterior query to the z_hf slice of the joint GP.
OptResult optimize_acquisition_point(AcqKind kind, const GPModel& gp, const AcqState& state,
                                     const Domain& domain, const AcqOptPolicy& policy, Rng& rng,
                                     const std::optional<FidelityPoint>& slice_fid = std::nullopt);

}  // namespace bbo
