#include "bbo/acquisition.hpp"

#include <algorithm>
#include <cmath>

namespace bbo {

const char* acq_kind_name(AcqKind kind) {
  switch (kind) {
    case AcqKind::Ucb: return "ucb";
    case AcqKind::Ei: return "ei";
    case AcqKind::Pi: return "pi";
    case AcqKind::Ts: return "ts";
    case AcqKind::Ttei: return "ttei";
    case AcqKind::AddUcb: return "add_ucb";
  }
  return "?";
}

AcqKind acq_kind_from_name(const std::string& name) {
  if (name == "ucb") return AcqKind::Ucb;
  if (name == "ei") return AcqKind::Ei;
  if (name == "pi") return AcqKind::Pi;
  if (name == "ts") return AcqKind::Ts;
  if (name == "ttei") return AcqKind::Ttei;
  if (name == "add_ucb") return AcqKind::AddUcb;
  raise(ErrorCode::UnknownLabel, "unknown acquisition '" + name + "'");
}

double ucb_beta(long t, int d) {
  require(t >= 1 && d >= 1, ErrorCode::InvalidArgument, "ucb_beta needs t >= 1, d >= 1");
  return 0.5 * d * std::log(2.0 * static_cast<double>(t) + 1.0);
}

AcqState AcqState::make(std::vector<AcqKind> kinds, double initial_weight) {
  require(!kinds.empty(), ErrorCode::InvalidArgument, "need at least one acquisition");
  AcqState state;
  state.enabled = std::move(kinds);
  state.weights.assign(state.enabled.size(), initial_weight);
  state.initial_weight = initial_weight;
  return state;
}

std::size_t AcqState::index_of(AcqKind kind) const {
  for (std::size_t i = 0; i < enabled.size(); ++i) {
    if (enabled[i] == kind) return i;
  }
  raise(ErrorCode::UnknownLabel,
        std::string("acquisition '") + acq_kind_name(kind) + "' is not enabled");
}

std::vector<AcqKind> default_acquisitions(const Domain& domain) {
  std::vector<AcqKind> kinds = {AcqKind::Ucb, AcqKind::Ei, AcqKind::Ts, AcqKind::Ttei};
  bool all_euclidean = true;
  for (const auto& v : domain.variables()) {
    all_euclidean = all_euclidean && v.kind == VarKind::Euclidean;
  }
  if (all_euclidean && !domain.has_constraint()) kinds.push_back(AcqKind::AddUcb);
  return kinds;
}

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double incumbent_for(const GPModel& gp, const AcqState& state) {
  if (std::isfinite(state.incumbent)) return state.incumbent;
  if (gp.size() > 0) return gp.observations().maxCoeff();
  return gp.mean_offset();
}

double expected_improvement(double mean, double sigma, double best) {
  const double delta = mean - best;
  if (sigma <= 0.0) return std::max(delta, 0.0);
  const double z = delta / sigma;
  return delta * normal_cdf(z) + sigma * normal_pdf(z);
}

}  // namespace

double acq_value(AcqKind kind, const GPModel& gp, const GPInput& q, const AcqState& state,
                 AcqContext* ctx) {
  switch (kind) {
    case AcqKind::Ucb: {
      const Posterior post = gp.posterior(q);
      return post.mean + std::sqrt(ucb_beta(state.step, gp.spec().dim())) * post.sigma;
    }
    case AcqKind::Ei: {
      const Posterior post = gp.posterior(q);
      return expected_improvement(post.mean, post.sigma, incumbent_for(gp, state));
    }
    case AcqKind::Pi: {
      const Posterior post = gp.posterior(q);
      const double best = incumbent_for(gp, state);
      if (post.sigma <= 0.0) {
        return post.mean > best ? 1.0 : (post.mean == best ? 0.5 : 0.0);
      }
      return normal_cdf((post.mean - best) / post.sigma);
    }
    case AcqKind::Ts: {
      require(ctx != nullptr && ctx->ts.has_value(), ErrorCode::InvalidArgument,
              "thompson sampling needs a per-call context");
      return ctx->ts->value(q);
    }
    case AcqKind::Ttei: {
      require(ctx != nullptr, ErrorCode::InvalidArgument, "ttei needs a per-call context");
      const Posterior post = gp.posterior(q);
      if (ctx->ttei_plain || !ctx->ttei_ref.has_value()) {
        return expected_improvement(post.mean, post.sigma, incumbent_for(gp, state));
      }
      if (q == *ctx->ttei_ref) return 0.0;
      // EI of the improvement f(x) - f(x1) under the joint posterior.
      const double cov = gp.posterior_cov(q, *ctx->ttei_ref);
      const double var = std::max(0.0, post.var_raw + ctx->ttei_ref_var - 2.0 * cov);
      return expected_improvement(post.mean - ctx->ttei_ref_mean, std::sqrt(var), 0.0);
    }
    case AcqKind::AddUcb:
      raise(ErrorCode::UnknownKind, "add_ucb has no pointwise value; use addgpucb_next");
  }
  raise(ErrorCode::UnknownKind, "unknown acquisition kind");
}

AcqKind choose_acquisition(const AcqState& state, Rng& rng) {
  require(!state.enabled.empty(), ErrorCode::InvalidArgument, "no acquisitions enabled");
  double total = 0.0;
  for (double w : state.weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < state.enabled.size(); ++i) {
    u -= state.weights[i];
    if (u <= 0.0) return state.enabled[i];
  }
  return state.enabled.back();
}

void update_weights(AcqState& state, AcqKind used, bool improved) {
  const std::size_t i = state.index_of(used);
  if (improved) state.weights[i] += 1.0;
}

Point addgpucb_next(const GPModel& gp, const AcqState& state, const Domain& domain,
                    const AcqOptPolicy& policy, Rng& rng,
                    const std::optional<FidelityPoint>& slice_fid) {
  const int m = gp.spec().num_groups();
  const double root_beta = std::sqrt(ucb_beta(state.step, gp.spec().dim()));
  Point assembled;
  assembled.coords.resize(static_cast<std::size_t>(domain.dim()));
  for (int j = 0; j < m; ++j) {
    const auto& group = gp.spec().group(j);
    const Domain sub = domain.restrict(group);
    const auto component_ucb = [&](const Point& xj) {
      const Posterior post = gp.posterior_component(j, xj, slice_fid);
      return post.mean + root_beta * post.sigma;
    };
    OptResult res = optimize_on_domain(component_ucb, sub, policy, rng);
    for (std::size_t k = 0; k < group.size(); ++k) {
      assembled.coords[static_cast<std::size_t>(group[k])] = res.x[k];
    }
  }
  return assembled;
}

OptResult optimize_acquisition_point(AcqKind kind, const GPModel& gp, const AcqState& state,
                                     const Domain& domain, const AcqOptPolicy& policy, Rng& rng,
                                     const std::optional<FidelityPoint>& slice_fid) {
  const auto query_of = [&](const Point& x) {
    GPInput q(x);
    if (slice_fid) q.fid = *slice_fid;
    return q;
  };

  if (kind == AcqKind::AddUcb) {
    Point x = addgpucb_next(gp, state, domain, policy, rng, slice_fid);
    const Posterior post = gp.posterior(query_of(x));
    const double value =
        post.mean + std::sqrt(ucb_beta(state.step, gp.spec().dim())) * post.sigma;
    return {std::move(x), value, 0};
  }

  AcqContext ctx;
  if (kind == AcqKind::Ts) ctx.ts.emplace(gp, rng);
  if (kind == AcqKind::Ttei) {
    ctx.ttei_plain = uniform01(rng) < 0.5;
    if (!ctx.ttei_plain) {
      // First pass: the plain EI maximizer becomes the reference x1.
      AcqContext ei_ctx;
      OptResult first = optimize_on_domain(
          [&](const Point& x) { return acq_value(AcqKind::Ei, gp, query_of(x), state, &ei_ctx); },
          domain, policy, rng);
      GPInput ref = query_of(first.x);
      const Posterior ref_post = gp.posterior(ref);
      ctx.ttei_ref = std::move(ref);
      ctx.ttei_ref_mean = ref_post.mean;
      ctx.ttei_ref_var = std::max(0.0, ref_post.var_raw);
    }
  }
  return optimize_on_domain(
      [&](const Point& x) { return acq_value(kind, gp, query_of(x), state, &ctx); }, domain,
      policy, rng);
}

}  // namespace bbo
