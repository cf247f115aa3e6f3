#pragma once

#include <functional>
#include <vector>

#include "bbo/acquisition.hpp"
#include "bbo/gp.hpp"

namespace bbo {

// Information-gap / cost threshold for fidelity selection. The default gap
// function is the normalized distance below; a custom one may be installed
// (e.g. an exponent for radial fidelity kernels, or +inf away from z_hf to
// force single-fidelity behavior).
struct FidelityFilter {
  double kernel_scale = 1.0;  // kappa0 of the currently selected hyperparameters
  std::function<double(const FidelityPoint&)> gap;  // defaults to information_gap

  static FidelityFilter for_gp(const GPModel& joint_gp, const FidelitySpace& space);
};

// Normalized information gap: coordinates affinely mapped onto [0,1], then
// ||z - z_hf||_2 / sqrt(p), so the gap lives in [0,1] and vanishes at z_hf.
double information_gap(const FidelitySpace& space, const FidelityPoint& z);

// The fidelities worth querying for the chosen point x_t: z_hf always, plus
// every grid fidelity that is cheaper than z_hf and whose posterior standard
// deviation exceeds sqrt(kappa0) * gap(z) * sqrt(cost(z)/cost(z_hf)).
std::vector<FidelityPoint> candidate_fidelities(const GPModel& joint_gp, const Point& x_t,
                                                const FidelitySpace& space,
                                                const FidelityFilter& filter,
                                                const std::vector<FidelityPoint>& z_grid);

// Minimum-cost member; cost ties broken toward the larger information gap,
// then lexicographically.
FidelityPoint select_fidelity(const std::vector<FidelityPoint>& candidates,
                              const FidelitySpace& space, const FidelityFilter& filter);

struct MfQuery {
  FidelityPoint z;
  Point x;
};

// The two-step query rule: x_t maximizes the acquisition on the z_hf slice of
// the joint posterior, then z_t is the cheapest candidate fidelity at x_t.
MfQuery mf_point_and_fidelity(const GPModel& joint_gp, const Domain& domain,
                              const FidelitySpace& space, AcqKind acq, const AcqState& state,
                              const AcqOptPolicy& policy, Rng& rng, int grid_per_dim = 10);

}  // namespace bbo
