#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bbo/orchestrator.hpp"

namespace bbo {

// A synthetic objective with its domain, optional fidelity space, recorded
// optimum and noise width. Objectives are pure; noise is injected per query,
// keyed by the noise seed and the dispatch step so asynchronous completion
// order cannot perturb it.
struct Benchmark {
  std::string name;
  Domain domain;
  std::optional<FidelitySpace> fidelity;
  std::function<double(const Point&)> f;  // true objective (maximized)
  std::function<double(const FidelityPoint&, const Point&)> g;  // joint, mf variants
  std::optional<double> f_opt;
  double noise_sigma = 0.0;

  // Noise-free value of a query (g at the query fidelity, f otherwise).
  double true_value(const std::optional<FidelityPoint>& z, const Point& x) const;
  Objective as_objective(std::uint64_t noise_seed) const;
};

// Catalog lookup. Base functions: branin, hartmann3, hartmann6, park1, park2,
// borehole. `<base>xK` stacks K copies over consecutive coordinate groups
// (e.g. hartmann3x6). Suffixes: -constrained (branin excluded), -noisy, -mf;
// they may be combined, e.g. "hartmann3-mf-noisy".
Benchmark benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

// Simple-regret curve f_opt - max_{t<=n} f(x_t) over the true values of the
// trace. In multi-fidelity traces only z_hf queries count and entries are
// +inf until the first one; noisy objectives are judged on true values.
std::vector<double> simple_regret(const std::vector<TraceRecord>& trace, double f_opt,
                                  const Benchmark& bench);

// Best-true-value curve (running maximum, -inf before the first counted query).
std::vector<double> best_value_curve(const std::vector<TraceRecord>& trace,
                                     const Benchmark& bench);

// Uniform random search baseline: budget valid points (constraint rejection),
// trace-compatible records. Multi-fidelity setups query at z_hf.
std::vector<TraceRecord> random_search(const Domain& domain, int budget, Rng& rng,
                                       const Objective* objective = nullptr,
                                       const std::optional<FidelitySpace>& fidelity = std::nullopt);

// Standalone evolutionary baseline over the objective itself (same mutation
// operator and selection rule as the acquisition optimizer).
std::vector<TraceRecord> ea_search(const Domain& domain, int budget, Rng& rng,
                                   const Objective& objective,
                                   const std::optional<FidelitySpace>& fidelity = std::nullopt);

}  // namespace bbo
