#pragma once

#include <functional>

#include <Eigen/Dense>

#include "bbo/domain.hpp"
#include "bbo/rng.hpp"

namespace bbo {

// Evolutionary acquisition optimizer configuration.
struct EAConfig {
  int initial_pool = 20;
  int mutations_per_generation = 10;
  int generations = 48;

  // Sizes the generation count so the optimizer spends `total_evals`
  // objective evaluations in all.
  static EAConfig for_budget(int total_evals);
  void validate() const;
};

struct OptResult {
  Point x;
  double value = 0.0;
  int evals = 0;
};

// Kind-aware mutation: a geometric number of coordinates (mean one) each get
// a local move (gaussian step, +-1..3 integer step, or uniform resample for
// discrete kinds with probability 1/2). Bounds are respected; the domain
// constraint is the caller's to enforce.
Point mutate_point(const Point& parent, const Domain& domain, Rng& rng);

// Maximizes f over the domain with an evolutionary strategy: a random valid
// initial pool, then generations of stochastically selected parents (higher
// values more likely) with kind-aware mutations. Every candidate that reaches
// f satisfies the domain constraint; infeasible mutants are redrawn.
OptResult maximize_acq_ea(const std::function<double(const Point&)>& f, const Domain& domain,
                          const EAConfig& config, Rng& rng);

struct DirectResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evals = 0;
};

// Deterministic dividing-rectangles search over a box: trisects potentially
// optimal rectangles chosen by the convex-hull rule over (size, value) until
// the evaluation budget is spent. Returns the best evaluated center.
DirectResult maximize_direct(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int budget);

// Exhaustive maximization over a finite domain (every valid point evaluated).
OptResult maximize_exhaustive(const std::function<double(const Point&)>& f, const Domain& domain,
                              std::size_t cap);

struct AcqOptPolicy {
  // Total acquisition evaluations; 0 means max(500, 50 * d).
  int budget = 0;
  // Domains with at most this many points are searched exhaustively.
  std::size_t exhaustive_cap = 1024;
  // Dividing-rectangles handles unconstrained euclidean domains up to here.
  int direct_dim_cap = 60;

  int effective_budget(int dim) const;
};

// Routes to exhaustive enumeration (small finite domains), dividing
// rectangles (unconstrained euclidean) or the evolutionary optimizer.
OptResult optimize_on_domain(const std::function<double(const Point&)>& f, const Domain& domain,
                             const AcqOptPolicy& policy, Rng& rng);

}  // namespace bbo
