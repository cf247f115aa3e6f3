#include "bbo/multi_fidelity.hpp"

#include <algorithm>
#include <cmath>

namespace bbo {

double information_gap(const FidelitySpace& space, const FidelityPoint& z) {
  require(space.contains(z), ErrorCode::OutOfSpace, "fidelity outside the space");
  const std::vector<double> zn = space.normalized(z);
  const std::vector<double> hn = space.normalized(space.z_hf());
  double sq = 0.0;
  for (std::size_t i = 0; i < zn.size(); ++i) {
    const double d = zn[i] - hn[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(zn.size()));
}

FidelityFilter FidelityFilter::for_gp(const GPModel& joint_gp, const FidelitySpace& space) {
  FidelityFilter filter;
  filter.kernel_scale = joint_gp.hp().scale;
  filter.gap = [&space](const FidelityPoint& z) { return information_gap(space, z); };
  return filter;
}

std::vector<FidelityPoint> candidate_fidelities(const GPModel& joint_gp, const Point& x_t,
                                                const FidelitySpace& space,
                                                const FidelityFilter& filter,
                                                const std::vector<FidelityPoint>& z_grid) {
  require(std::find(z_grid.begin(), z_grid.end(), space.z_hf()) != z_grid.end(),
          ErrorCode::GridMissingZhf, "candidate grid must contain z_hf");
  std::function<double(const FidelityPoint&)> gap = filter.gap;
  if (!gap) gap = [&space](const FidelityPoint& z) { return information_gap(space, z); };
  const double cost_hf = space.cost(space.z_hf());
  const double root_scale = std::sqrt(filter.kernel_scale);

  std::vector<FidelityPoint> out;
  out.push_back(space.z_hf());
  for (const FidelityPoint& z : z_grid) {
    if (z == space.z_hf()) continue;
    const double cost = space.cost(z);
    if (!(cost < cost_hf)) continue;
    const double tau = joint_gp.posterior(GPInput(z, x_t)).sigma;
    const double threshold = root_scale * gap(z) * std::sqrt(cost / cost_hf);
    if (tau > threshold) out.push_back(z);
  }
  return out;
}

FidelityPoint select_fidelity(const std::vector<FidelityPoint>& candidates,
                              const FidelitySpace& space, const FidelityFilter& filter) {
  require(!candidates.empty(), ErrorCode::EmptySet, "no candidate fidelities");
  std::function<double(const FidelityPoint&)> gap = filter.gap;
  if (!gap) gap = [&space](const FidelityPoint& z) { return information_gap(space, z); };
  const FidelityPoint* best = &candidates.front();
  double best_cost = space.cost(*best);
  double best_gap = gap(*best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const FidelityPoint& z = candidates[i];
    const double cost = space.cost(z);
    const double g = gap(z);
    bool better = false;
    if (cost < best_cost) {
      better = true;
    } else if (cost == best_cost) {
      if (g > best_gap) {
        better = true;
      } else if (g == best_gap) {
        better = space.normalized(z) < space.normalized(*best);
      }
    }
    if (better) {
      best = &z;
      best_cost = cost;
      best_gap = g;
    }
  }
  return *best;
}

MfQuery mf_point_and_fidelity(const GPModel& joint_gp, const Domain& domain,
                              const FidelitySpace& space, AcqKind acq, const AcqState& state,
                              const AcqOptPolicy& policy, Rng& rng, int grid_per_dim) {
  require(joint_gp.spec().is_product(), ErrorCode::NotProductKernel,
          "multi-fidelity selection needs a product kernel");
  const OptResult point =
      optimize_acquisition_point(acq, joint_gp, state, domain, policy, rng, space.z_hf());
  const FidelityFilter filter = FidelityFilter::for_gp(joint_gp, space);
  const std::vector<FidelityPoint> grid = space.candidate_grid(grid_per_dim);
  const std::vector<FidelityPoint> candidates =
      candidate_fidelities(joint_gp, point.x, space, filter, grid);
  return {select_fidelity(candidates, space, filter), point.x};
}

}  // namespace bbo
