#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bbo/expr.hpp"
#include "bbo/point.hpp"
#include "bbo/rng.hpp"

namespace bbo {

enum class VarKind { Euclidean, Integer, Discrete, DiscreteNumeric };

const char* var_kind_name(VarKind kind);
VarKind var_kind_from_name(const std::string& name);

// One scalar coordinate of the search space. Bounded kinds use [lo, hi];
// discrete kinds enumerate their items.
struct VariableSpec {
  std::string name;
  VarKind kind = VarKind::Euclidean;
  double lo = 0.0, hi = 1.0;            // euclidean / integer
  std::vector<std::string> labels;      // discrete
  std::vector<double> items;            // discrete_numeric

  static VariableSpec euclidean(std::string name, double lo, double hi);
  static VariableSpec integer(std::string name, std::int64_t lo, std::int64_t hi);
  static VariableSpec discrete(std::string name, std::vector<std::string> labels);
  static VariableSpec discrete_numeric(std::string name, std::vector<double> items);

  void validate() const;
  bool value_in_bounds(const Value& v) const;
  // Width of the numeric embedding (item span for discrete kinds, 1 for labels).
  double numeric_range() const;
  std::size_t item_count() const;  // finite cardinality; 0 if continuous
};

using ConstraintFn = std::function<bool(const Point&)>;

class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<VariableSpec> vars);

  // Constraints from config files keep their expression text so the domain
  // can be serialized back; programmatic callers may install any pure
  // predicate instead.
  void set_constraint(Expr expr);
  void set_constraint(ConstraintFn fn);

  int dim() const { return static_cast<int>(vars_.size()); }
  const std::vector<VariableSpec>& variables() const { return vars_; }
  const VariableSpec& variable(std::size_t i) const { return vars_[i]; }
  bool has_constraint() const { return static_cast<bool>(constraint_); }
  const std::optional<Expr>& constraint_expr() const { return constraint_expr_; }

  std::vector<std::string> variable_names() const;

  // True iff every coordinate is in bounds and the constraint (if any) holds.
  // Throws ArityMismatch when the point has the wrong number of coordinates.
  bool validate_point(const Point& p) const;

  // Sub-domain over a subset of coordinates (drops the joint constraint).
  Domain restrict(const std::vector<int>& coord_indices) const;

  // Product of item counts if every variable is finite, 0 otherwise.
  std::size_t finite_size(std::size_t cap) const;
  std::vector<Point> enumerate(std::size_t cap) const;

  Point uniform_point(Rng& rng) const;  // in-bounds draw, constraint not applied

 private:
  std::vector<VariableSpec> vars_;
  ConstraintFn constraint_;
  std::optional<Expr> constraint_expr_;
};

class FidelitySpace {
 public:
  FidelitySpace() = default;
  // Variables must be euclidean, integer or discrete_numeric. The cost
  // function must be positive over the space.
  FidelitySpace(std::vector<VariableSpec> vars, FidelityPoint z_hf,
                std::function<double(const FidelityPoint&)> cost,
                std::optional<Expr> cost_expr = std::nullopt);

  int dim() const { return static_cast<int>(vars_.size()); }
  const std::vector<VariableSpec>& variables() const { return vars_; }
  const FidelityPoint& z_hf() const { return z_hf_; }
  double cost(const FidelityPoint& z) const;
  const std::optional<Expr>& cost_expr() const { return cost_expr_; }

  bool contains(const FidelityPoint& z) const;
  // Affine normalization of each coordinate onto [0, 1].
  std::vector<double> normalized(const FidelityPoint& z) const;

  // Candidate fidelities for the variance filter: an axis grid of
  // `per_dim` values per dimension plus z_hf itself.
  std::vector<FidelityPoint> candidate_grid(int per_dim = 10) const;

 private:
  std::vector<VariableSpec> vars_;
  FidelityPoint z_hf_;
  std::function<double(const FidelityPoint&)> cost_;
  std::optional<Expr> cost_expr_;
};

// Parses the JSON domain description (see README for the schema) and rejects
// unknown keys. Returns the domain and, when a "fidelity" block is present,
// the fidelity space.
std::pair<Domain, std::optional<FidelitySpace>> parse_domain(const std::string& config_text);
std::string serialize_domain(const Domain& domain,
                             const std::optional<FidelitySpace>& fidelity = std::nullopt);

// Latin hypercube initial design: euclidean and integer coordinates jointly
// form an LHS (integers by rounding, ties at bin edges rounded down);
// discrete coordinates are drawn uniformly. Constraint violations are
// redrawn; throws InfeasibleSampling after 100*n consecutive rejections.
std::vector<Point> sample_init(const Domain& domain, int n, Rng& rng);

// Uniform rejection sampling of a single valid point.
Point sample_valid_point(const Domain& domain, Rng& rng, int max_attempts = 10000);

}  // namespace bbo
