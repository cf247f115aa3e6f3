#include "bbo/hyper.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "bbo/acq_opt.hpp"

namespace bbo {

namespace {

// Inner-optimizer budgets for marginal-likelihood maximization. The
// decomposition search keeps per-candidate budgets small and re-optimizes the
// winner harder.
constexpr int kMmlFinalBudgetMin = 150;
constexpr int kMmlFinalBudgetPerDim = 25;
constexpr int kMmlCandidateBudgetMin = 36;
constexpr int kMmlCandidateBudgetPerDim = 5;

constexpr int kGibbsBurnIn = 1000;
constexpr int kGibbsThin = 100;
constexpr double kSliceWidth = 0.25;  // fraction of the unit box
constexpr int kSliceMaxStepOut = 20;

}  // namespace

KernelFamily KernelFamily::plain(KernelKind base, Domain domain,
                                 std::optional<FidelitySpace> fidelity, KernelKind fid_kind) {
  KernelFamily f;
  f.base = base;
  f.additive = false;
  f.domain = std::move(domain);
  f.fidelity = std::move(fidelity);
  f.fid_kind = fid_kind;
  return f;
}

KernelFamily KernelFamily::make_additive(KernelKind base, Domain domain, int p_max,
                                         int k_decomps, std::optional<FidelitySpace> fidelity,
                                         KernelKind fid_kind) {
  KernelFamily f;
  f.base = base;
  f.additive = true;
  f.p_max = p_max;
  f.k_decomps = k_decomps;
  f.domain = std::move(domain);
  f.fidelity = std::move(fidelity);
  f.fid_kind = fid_kind;
  return f;
}

int KernelFamily::effective_p_max() const { return std::min(p_max, domain.dim()); }

KernelSpec KernelFamily::spec(const std::optional<Decomposition>& dec) const {
  KernelSpec domain_spec = [&] {
    if (additive) {
      require(dec.has_value(), ErrorCode::InvalidArgument,
              "additive kernel family needs a decomposition");
      return KernelSpec::additive(base, domain, *dec);
    }
    return KernelSpec::for_domain(base, domain);
  }();
  if (!fidelity) return domain_spec;
  return KernelSpec::product(KernelSpec::fidelity(fid_kind, *fidelity), std::move(domain_spec));
}

double HyperParamRange::from_unit(double u) const {
  if (fixed()) return lo;
  const double t = std::clamp(u, 0.0, 1.0);
  if (log_scale) return lo * std::pow(hi / lo, t);
  return lo + t * (hi - lo);
}

KernelHyperparams HyperBounds::hp_from_unit(const KernelFamily& family,
                                            const Eigen::VectorXd& unit) const {
  require(unit.size() == static_cast<Eigen::Index>(params.size()), ErrorCode::ArityMismatch,
          "unit vector arity does not match bounds");
  KernelHyperparams hp = KernelHyperparams::ones(family.domain.dim(), family.fid_dim());
  hp.noise_var = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const HyperParamRange& p = params[i];
    const double v = p.from_unit(unit(static_cast<Eigen::Index>(i)));
    switch (p.slot) {
      case HyperParamRange::Slot::Lengthscale:
        hp.lengthscales[static_cast<std::size_t>(p.index)] = v;
        break;
      case HyperParamRange::Slot::HamWeight:
        hp.ham_weights[static_cast<std::size_t>(p.index)] = v;
        break;
      case HyperParamRange::Slot::FidScale:
        hp.fid_scales[static_cast<std::size_t>(p.index)] = v;
        break;
      case HyperParamRange::Slot::Scale:
        hp.scale = v;
        break;
      case HyperParamRange::Slot::NoiseVar:
        hp.noise_var = v;
        break;
    }
  }
  return hp;
}

HyperBounds build_hyper_bounds(const KernelFamily& family, const Eigen::VectorXd& y) {
  HyperBounds bounds;
  double vhat = 1e-4;
  if (y.size() > 0) {
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size());
    vhat = std::max(var, 1e-4);
  }
  int discrete_count = 0;
  for (const auto& v : family.domain.variables()) {
    if (v.kind == VarKind::Discrete) ++discrete_count;
  }
  const auto& vars = family.domain.variables();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    HyperParamRange p;
    p.index = static_cast<int>(i);
    p.log_scale = true;
    if (vars[i].kind == VarKind::Discrete) {
      p.name = "ham_weight:" + vars[i].name;
      p.slot = HyperParamRange::Slot::HamWeight;
      // A single discrete coordinate normalizes to weight one regardless.
      p.lo = discrete_count > 1 ? 0.1 : 1.0;
      p.hi = discrete_count > 1 ? 10.0 : 1.0;
    } else {
      const double w = vars[i].numeric_range();
      p.name = "lengthscale:" + vars[i].name;
      p.slot = HyperParamRange::Slot::Lengthscale;
      p.lo = 1e-2 * w;
      p.hi = 10.0 * w;
    }
    bounds.params.push_back(std::move(p));
  }
  for (int i = 0; i < family.fid_dim(); ++i) {
    HyperParamRange p;
    p.name = "fid_scale:" + family.fidelity->variables()[static_cast<std::size_t>(i)].name;
    p.slot = HyperParamRange::Slot::FidScale;
    p.index = i;
    p.lo = 0.1;
    p.hi = 10.0;
    bounds.params.push_back(std::move(p));
  }
  {
    HyperParamRange p;
    p.name = "scale";
    p.slot = HyperParamRange::Slot::Scale;
    p.lo = 0.1 * vhat;
    p.hi = 10.0 * vhat;
    bounds.params.push_back(std::move(p));
  }
  {
    HyperParamRange p;
    p.name = "noise_var";
    p.slot = HyperParamRange::Slot::NoiseVar;
    p.lo = 1e-5 * vhat;
    p.hi = vhat;
    bounds.params.push_back(std::move(p));
  }
  return bounds;
}

const char* hp_strategy_name(HpStrategy s) {
  return s == HpStrategy::Mml ? "mml" : "sfp";
}

// ---------------------------------------------------------------------------
// Marginal-likelihood evaluator with cached pairwise terms.

struct MllEvaluator::Impl {
  KernelFamily family;
  int n = 0;
  Eigen::VectorXd resid;
  std::vector<Eigen::ArrayXXd> sqdiff;       // per coordinate (numeric slots)
  std::vector<Eigen::ArrayXXd> eqmask;       // per coordinate (discrete slots)
  std::vector<Eigen::ArrayXXd> fid_logterm;  // exp-decay: log(u_i + u_j + 1)
  std::vector<Eigen::ArrayXXd> fid_sqdiff;   // radial: normalized squared diffs
  std::vector<int> numeric_coords, discrete_coords;

  mutable Eigen::ArrayXXd r2, unit, block, ham;
  mutable Eigen::MatrixXd kmat;

  void base_transform(KernelKind kind, const Eigen::ArrayXXd& r2_in,
                      Eigen::ArrayXXd& out) const {
    if (kind == KernelKind::SquaredExp) {
      out = (-0.5 * r2_in).exp();
    } else {
      out = (std::sqrt(5.0) * r2_in.sqrt()).eval();
      out = (1.0 + out + out.square() / 3.0) * (-out).exp();
    }
  }

  // Unit hamming factor over the discrete coordinates in `scope` (all when
  // scope is null); multiplies into `out`.
  void apply_hamming(const KernelHyperparams& hp, const std::vector<int>* scope,
                     Eigen::ArrayXXd& out) const {
    double total = 0.0;
    bool first = true;
    for (int c : scope ? *scope : discrete_coords) {
      if (eqmask[static_cast<std::size_t>(c)].size() == 0) continue;
      const double w = hp.ham_weights[static_cast<std::size_t>(c)];
      if (first) {
        ham = w * eqmask[static_cast<std::size_t>(c)];
        first = false;
      } else {
        ham += w * eqmask[static_cast<std::size_t>(c)];
      }
      total += w;
    }
    if (!first && total > 0.0) out *= ham / total;
  }

  void accumulate_r2(const KernelHyperparams& hp, const std::vector<int>* scope) const {
    r2.setZero(n, n);
    for (int c : scope ? *scope : numeric_coords) {
      if (sqdiff[static_cast<std::size_t>(c)].size() == 0) continue;
      const double l = hp.lengthscales[static_cast<std::size_t>(c)];
      r2 += sqdiff[static_cast<std::size_t>(c)] / (l * l);
    }
  }

  double eval(const KernelHyperparams& hp, const std::optional<Decomposition>& dec) const {
    if (n == 0) return 0.0;
    if (family.additive) {
      require(dec.has_value(), ErrorCode::InvalidArgument,
              "additive family needs a decomposition");
      const double m = static_cast<double>(dec->groups.size());
      unit.setZero(n, n);
      for (const auto& g : dec->groups) {
        accumulate_r2(hp, &g);
        base_transform(family.base, r2, block);
        apply_hamming(hp, &g, block);
        unit += block;
      }
      unit /= m;
    } else if (family.base == KernelKind::Hamming) {
      unit.setOnes(n, n);
      apply_hamming(hp, nullptr, unit);
    } else {
      accumulate_r2(hp, nullptr);
      base_transform(family.base, r2, unit);
      apply_hamming(hp, nullptr, unit);
    }
    if (family.fidelity) {
      if (family.fid_kind == KernelKind::ExpDecay) {
        r2.setZero(n, n);
        for (int i = 0; i < family.fid_dim(); ++i) {
          r2 += hp.fid_scales[static_cast<std::size_t>(i)] *
                fid_logterm[static_cast<std::size_t>(i)];
        }
        unit *= (-r2).exp();
      } else {
        r2.setZero(n, n);
        for (int i = 0; i < family.fid_dim(); ++i) {
          const double l = hp.fid_scales[static_cast<std::size_t>(i)];
          r2 += fid_sqdiff[static_cast<std::size_t>(i)] / (l * l);
        }
        base_transform(family.fid_kind, r2, block);
        unit *= block;
      }
    }
    kmat = (hp.scale * unit).matrix();
    kmat.diagonal().array() += hp.noise_var;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(kmat);  // in place
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd white = llt.matrixL().solve(resid);
    const double logdet = 2.0 * kmat.diagonal().array().log().sum();
    return -0.5 * white.squaredNorm() - 0.5 * logdet -
           0.5 * n * std::log(2.0 * M_PI);
  }
};

MllEvaluator::MllEvaluator(const KernelFamily& family, std::vector<GPInput> inputs,
                           Eigen::VectorXd y)
    : impl_(std::make_unique<Impl>()) {
  impl_->family = family;
  impl_->n = static_cast<int>(inputs.size());
  const int n = impl_->n;
  require(static_cast<Eigen::Index>(inputs.size()) == y.size(), ErrorCode::ArityMismatch,
          "observation count does not match input count");
  if (n == 0) return;
  impl_->resid = y.array() - y.mean();

  const int d = family.domain.dim();
  impl_->sqdiff.resize(static_cast<std::size_t>(d));
  impl_->eqmask.resize(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) {
    const auto& var = family.domain.variable(static_cast<std::size_t>(c));
    if (var.kind == VarKind::Discrete) {
      Eigen::ArrayXXd eq(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          eq(i, j) = label(inputs[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(c)]) ==
                             label(inputs[static_cast<std::size_t>(j)].x[static_cast<std::size_t>(c)])
                         ? 1.0
                         : 0.0;
        }
      }
      impl_->eqmask[static_cast<std::size_t>(c)] = std::move(eq);
      impl_->discrete_coords.push_back(c);
    } else {
      Eigen::VectorXd vals(n);
      for (int i = 0; i < n; ++i) {
        vals(i) = numeric(inputs[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(c)]);
      }
      Eigen::ArrayXXd sq = (vals.replicate(1, n) - vals.transpose().replicate(n, 1)).array().square();
      impl_->sqdiff[static_cast<std::size_t>(c)] = std::move(sq);
      impl_->numeric_coords.push_back(c);
    }
  }
  if (family.fidelity) {
    const int p = family.fid_dim();
    const KernelSpec fid_spec = KernelSpec::fidelity(family.fid_kind, *family.fidelity);
    for (int i = 0; i < p; ++i) {
      Eigen::VectorXd u(n);
      for (int r = 0; r < n; ++r) {
        require(inputs[static_cast<std::size_t>(r)].fid.has_value(), ErrorCode::KindMismatch,
                "multi-fidelity family needs fidelities on every input");
        const double z = numeric((*inputs[static_cast<std::size_t>(r)].fid)[static_cast<std::size_t>(i)]);
        const double span = fid_spec.fid_hi[static_cast<std::size_t>(i)] -
                            fid_spec.fid_lo[static_cast<std::size_t>(i)];
        u(r) = (z - fid_spec.fid_ref[static_cast<std::size_t>(i)]) / span;
      }
      if (family.fid_kind == KernelKind::ExpDecay) {
        Eigen::ArrayXXd term(n, n);
        for (int r = 0; r < n; ++r) {
          for (int s = 0; s < n; ++s) {
            term(r, s) = std::log(std::fabs(u(r)) + std::fabs(u(s)) + 1.0);
          }
        }
        impl_->fid_logterm.push_back(std::move(term));
      } else {
        Eigen::ArrayXXd sq =
            (u.replicate(1, n) - u.transpose().replicate(n, 1)).array().square();
        impl_->fid_sqdiff.push_back(std::move(sq));
      }
    }
  }
}

MllEvaluator::~MllEvaluator() = default;
MllEvaluator::MllEvaluator(MllEvaluator&&) noexcept = default;

double MllEvaluator::eval(const KernelHyperparams& hp,
                          const std::optional<Decomposition>& dec) const {
  return impl_->eval(hp, dec);
}

int MllEvaluator::n() const { return impl_->n; }

// ---------------------------------------------------------------------------
// MML maximization.

namespace {

std::vector<int> free_param_indices(const HyperBounds& bounds) {
  std::vector<int> free;
  for (int i = 0; i < bounds.size(); ++i) {
    if (!bounds.params[static_cast<std::size_t>(i)].fixed()) free.push_back(i);
  }
  return free;
}

Eigen::VectorXd embed_free(const HyperBounds& bounds, const std::vector<int>& free,
                           const Eigen::VectorXd& free_values) {
  Eigen::VectorXd unit = Eigen::VectorXd::Constant(bounds.size(), 0.0);
  for (std::size_t i = 0; i < free.size(); ++i) {
    unit(free[i]) = free_values(static_cast<Eigen::Index>(i));
  }
  return unit;
}

struct MllSearchResult {
  double mll = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd unit;
};

// DIRECT over the free coordinates for a fixed decomposition.
MllSearchResult search_continuous(const MllEvaluator& evaluator, const KernelFamily& family,
                                  const HyperBounds& bounds, const std::vector<int>& free,
                                  const std::optional<Decomposition>& dec, int budget) {
  MllSearchResult out;
  if (free.empty()) {
    out.unit = Eigen::VectorXd::Constant(bounds.size(), 0.0);
    out.mll = evaluator.eval(bounds.hp_from_unit(family, out.unit), dec);
    return out;
  }
  const auto objective = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd unit = embed_free(bounds, free, v);
    return evaluator.eval(bounds.hp_from_unit(family, unit), dec);
  };
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free.size()));
  const Eigen::VectorXd hi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(free.size()));
  DirectResult res = maximize_direct(objective, lo, hi, std::max(budget, 3));
  out.mll = res.value;
  out.unit = embed_free(bounds, free, res.x);
  return out;
}

}  // namespace

std::vector<Decomposition> sample_decompositions(int d, int p_max, int k, Rng& rng) {
  require(p_max >= 1 && p_max <= d, ErrorCode::InvalidArgument, "need 1 <= p_max <= d");
  std::vector<Decomposition> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const int p = static_cast<int>(uniform_int(rng, 1, p_max));
    std::vector<int> ordering(static_cast<std::size_t>(d));
    std::iota(ordering.begin(), ordering.end(), 0);
    shuffle(ordering, rng);
    out.push_back(decomposition_from_ordering(ordering, p));
  }
  return out;
}

HyperChoice maximize_mll(const std::vector<GPInput>& inputs, const Eigen::VectorXd& y,
                         const KernelFamily& family, const HyperBounds& bounds, Rng& rng,
                         MmlReport* report) {
  require(!inputs.empty(), ErrorCode::EmptyData, "maximize_mll needs observations");
  MllEvaluator evaluator(family, inputs, y);
  const std::vector<int> free = free_param_indices(bounds);
  const int m = static_cast<int>(free.size());
  const int final_budget = std::max(kMmlFinalBudgetMin, kMmlFinalBudgetPerDim * m);

  if (!family.additive) {
    const MllSearchResult res =
        search_continuous(evaluator, family, bounds, free, std::nullopt, final_budget);
    return {bounds.hp_from_unit(family, res.unit), std::nullopt};
  }
  if (family.fixed_decomposition) {
    const MllSearchResult res = search_continuous(evaluator, family, bounds, free,
                                                  family.fixed_decomposition, final_budget);
    if (report) report->candidates.push_back({*family.fixed_decomposition, res.mll});
    return {bounds.hp_from_unit(family, res.unit), family.fixed_decomposition};
  }

  // Partial maximization over decompositions: k random draws per group size,
  // deduplicated, each with a small continuous budget.
  const int candidate_budget = std::max(kMmlCandidateBudgetMin, kMmlCandidateBudgetPerDim * m);
  std::map<std::string, Decomposition> candidates;
  const int d = family.domain.dim();
  for (int p = 1; p <= family.effective_p_max(); ++p) {
    for (int i = 0; i < family.k_decomps; ++i) {
      std::vector<int> ordering(static_cast<std::size_t>(d));
      std::iota(ordering.begin(), ordering.end(), 0);
      shuffle(ordering, rng);
      Decomposition dec = decomposition_from_ordering(ordering, p);
      candidates.emplace(dec.canonical(), std::move(dec));
    }
  }

  double best_mll = -std::numeric_limits<double>::infinity();
  std::optional<Decomposition> best_dec;
  Eigen::VectorXd best_unit = Eigen::VectorXd::Constant(bounds.size(), 0.5);
  for (const auto& [key, dec] : candidates) {
    const MllSearchResult res =
        search_continuous(evaluator, family, bounds, free, dec, candidate_budget);
    if (report) report->candidates.push_back({dec, res.mll});
    if (res.mll > best_mll) {
      best_mll = res.mll;
      best_dec = dec;
      best_unit = res.unit;
    }
  }
  require(best_dec.has_value(), ErrorCode::InvalidArgument, "no decomposition candidates");

  // Re-optimize the winner with the full budget; keep whichever probe won.
  const MllSearchResult fin =
      search_continuous(evaluator, family, bounds, free, best_dec, final_budget);
  if (fin.mll > best_mll) {
    best_mll = fin.mll;
    best_unit = fin.unit;
  }
  if (report) {
    for (auto& cand : report->candidates) {
      if (cand.decomposition == *best_dec) cand.mll = std::max(cand.mll, best_mll);
    }
  }
  return {bounds.hp_from_unit(family, best_unit), best_dec};
}

// ---------------------------------------------------------------------------
// Gibbs sampling.

GibbsChain::GibbsChain(const KernelFamily& family, const HyperBounds& bounds,
                       std::vector<GPInput> inputs, Eigen::VectorXd y)
    : family_(&family), bounds_(bounds),
      evaluator_(family, std::move(inputs), std::move(y)) {
  free_params_ = free_param_indices(bounds_);
  has_decomposition_ = family.additive && !family.fixed_decomposition;
  unit_ = Eigen::VectorXd::Constant(bounds_.size(), 0.5);
  if (family.additive) {
    if (family.fixed_decomposition) {
      dec_ = family.fixed_decomposition;
    } else {
      std::vector<int> identity(static_cast<std::size_t>(family.domain.dim()));
      std::iota(identity.begin(), identity.end(), 0);
      dec_ = decomposition_from_ordering(identity, family.effective_p_max());
    }
  }
  cached_log_target_ = log_target(unit_, dec_);
}

double GibbsChain::log_target(const Eigen::VectorXd& unit,
                              const std::optional<Decomposition>& dec) const {
  for (Eigen::Index i = 0; i < unit.size(); ++i) {
    if (unit(i) < 0.0 || unit(i) > 1.0) return -std::numeric_limits<double>::infinity();
  }
  return evaluator_.eval(bounds_.hp_from_unit(*family_, unit), dec);
}

void GibbsChain::set_unit(const Eigen::VectorXd& unit) {
  unit_ = unit;
  cached_log_target_ = log_target(unit_, dec_);
}

HyperChoice GibbsChain::current(const KernelFamily& family) const {
  return {bounds_.hp_from_unit(family, unit_), dec_};
}

void GibbsChain::update_coordinate(int k, Rng& rng) {
  const double x0 = unit_(k);
  // Slice level below the current density.
  const double level = cached_log_target_ + std::log(uniform01(rng) + 1e-300);
  const double width = kSliceWidth;
  const double u = uniform01(rng);
  double xl = x0 - width * u;
  double xr = x0 + width * (1.0 - u);
  Eigen::VectorXd probe = unit_;
  const auto target_at = [&](double x) {
    probe(k) = x;
    return log_target(probe, dec_);
  };
  for (int i = 0; i < kSliceMaxStepOut && target_at(xl) > level; ++i) xl -= width;
  for (int i = 0; i < kSliceMaxStepOut && target_at(xr) > level; ++i) xr += width;
  while (xr - xl > 1e-12) {
    const double xp = uniform(rng, xl, xr);
    const double lp = target_at(xp);
    if (lp >= level) {
      unit_(k) = xp;
      cached_log_target_ = lp;
      return;
    }
    (xp > x0 ? xr : xl) = xp;
  }
}

void GibbsChain::update_decomposition(Rng& rng) {
  // Metropolis-Hastings with the prior as the proposal: acceptance reduces to
  // the likelihood ratio.
  const auto proposal = sample_decompositions(family_->domain.dim(),
                                              family_->effective_p_max(), 1, rng);
  const double lp = log_target(unit_, proposal.front());
  if (std::log(uniform01(rng) + 1e-300) < lp - cached_log_target_) {
    dec_ = proposal.front();
    cached_log_target_ = lp;
  }
}

void GibbsChain::tick(Rng& rng) {
  const std::size_t slots = free_params_.size() + (has_decomposition_ ? 1 : 0);
  if (slots == 0) return;
  if (scan_pos_ >= scan_order_.size()) {
    scan_order_.clear();
    for (int idx : free_params_) scan_order_.push_back(idx);
    if (has_decomposition_) scan_order_.push_back(-1);
    shuffle(scan_order_, rng);
    scan_pos_ = 0;
  }
  const int slot = scan_order_[scan_pos_++];
  if (slot < 0) {
    update_decomposition(rng);
  } else {
    update_coordinate(slot, rng);
  }
}

void GibbsChain::sweep(Rng& rng) {
  const std::size_t slots = free_params_.size() + (has_decomposition_ ? 1 : 0);
  scan_order_.clear();  // force a fresh randomized scan
  scan_pos_ = 0;
  for (std::size_t i = 0; i < slots; ++i) tick(rng);
}

std::vector<HyperChoice> gibbs_sample_posterior(const std::vector<GPInput>& inputs,
                                                const Eigen::VectorXd& y,
                                                const KernelFamily& family,
                                                const HyperBounds& bounds, int count, Rng& rng) {
  require(count >= 1, ErrorCode::InvalidArgument, "need count >= 1");
  GibbsChain chain(family, bounds, inputs, y);
  std::vector<HyperChoice> samples;
  samples.reserve(static_cast<std::size_t>(count));
  long ticks = 0;
  while (static_cast<int>(samples.size()) < count) {
    chain.tick(rng);
    ++ticks;
    if (ticks > kGibbsBurnIn && (ticks - kGibbsBurnIn) % kGibbsThin == 0) {
      samples.push_back(chain.current(family));
    }
  }
  return samples;
}

HpDraw choose_hp(HyperState& state, Rng& rng) {
  require(state.initialized, ErrorCode::InvalidArgument, "hyper state not initialized");
  const double p_mml = state.w_mml / (state.w_mml + state.w_sfp);
  if (uniform01(rng) < p_mml) {
    return {HpStrategy::Mml, false, state.theta_mml};
  }
  if (state.queue.empty()) {
    return {HpStrategy::Mml, true, state.theta_mml};
  }
  HpDraw draw{HpStrategy::Sfp, false, state.queue.front()};
  state.queue.pop_front();
  return draw;
}

void refresh_hyper_state(HyperState& state, const std::vector<GPInput>& inputs,
                         const Eigen::VectorXd& y, const KernelFamily& family, Rng& rng,
                         MmlReport* report) {
  const HyperBounds bounds = build_hyper_bounds(family, y);
  state.theta_mml = maximize_mll(inputs, y, family, bounds, rng, report);
  state.queue.clear();
  for (auto& sample : gibbs_sample_posterior(inputs, y, family, bounds, state.n_cyc, rng)) {
    state.queue.push_back(std::move(sample));
  }
  state.initialized = true;
}

}  // namespace bbo
