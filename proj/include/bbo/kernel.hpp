#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bbo/domain.hpp"
#include "bbo/point.hpp"

namespace bbo {

enum class KernelKind { SquaredExp, Matern25, Hamming, ExpDecay, Additive, Product };

const char* kernel_kind_name(KernelKind kind);

// Disjoint partition of coordinate indices (0-based) into groups of size at
// most max_group_size; defines the additive kernel structure.
struct Decomposition {
  std::vector<std::vector<int>> groups;
  int max_group_size = 0;

  int num_groups() const { return static_cast<int>(groups.size()); }
  void validate(int dim) const;
  // Canonical text form, used to deduplicate sampled decompositions.
  std::string canonical() const;
  bool operator==(const Decomposition& other) const { return groups == other.groups; }
};

// Chunks the ordering into consecutive groups of size at most p; indices
// inside every group are sorted ascending.
Decomposition decomposition_from_ordering(const std::vector<int>& ordering, int p);

// A query as seen by the joint GP: the domain point plus, in multi-fidelity
// mode, the fidelity it was (or will be) evaluated at.
struct GPInput {
  Point x;
  std::optional<FidelityPoint> fid;

  GPInput() = default;
  GPInput(Point point) : x(std::move(point)) {}  // NOLINT(google-explicit-constructor)
  GPInput(FidelityPoint z, Point point) : x(std::move(point)), fid(std::move(z)) {}

  bool operator==(const GPInput& other) const { return x == other.x && fid == other.fid; }
};

struct KernelHyperparams {
  double scale = 1.0;      // kappa0, overall kernel scale
  double noise_var = 0.0;  // eta^2, applied to the Gram diagonal by the GP
  // Indexed by original domain coordinate; entries are read only where the
  // coordinate kind uses them.
  std::vector<double> lengthscales;  // numeric coordinates
  std::vector<double> ham_weights;   // discrete coordinates, normalized per block
  // Per fidelity coordinate: decay exponent for exp-decay fidelity kernels,
  // lengthscale on normalized coordinates for radial ones.
  std::vector<double> fid_scales;

  static KernelHyperparams ones(int dim, int fid_dim = 0);
  void validate() const;
};

// Kernel structure over a domain (optionally crossed with a fidelity space).
// The scale is carried once at the top: every factor below it is
// unit-normalized (value 1 at zero separation / at the reference fidelity).
struct KernelSpec {
  KernelKind kind = KernelKind::Matern25;
  std::vector<VarKind> coord_kinds;

  // Additive form: disjoint groups covering every coordinate, one sub-kernel
  // per group. Each group kernel carries 1/num_groups of the unit mass so the
  // additive factor stays unit-normalized.
  std::vector<std::vector<int>> groups;
  std::vector<KernelSpec> subs;  // additive: per group; product: {fidelity, domain}

  // Fidelity kernels: affine normalization of each coordinate and the
  // reference fidelity the kernel is anchored at.
  std::vector<double> fid_lo, fid_hi, fid_ref;

  static KernelSpec for_domain(KernelKind base, const Domain& domain);
  static KernelSpec additive(KernelKind base, const Domain& domain, const Decomposition& dec);
  static KernelSpec fidelity(KernelKind kind, const FidelitySpace& space);
  static KernelSpec product(KernelSpec fidelity_spec, KernelSpec domain_spec);

  bool is_additive_form() const;
  bool is_product() const { return kind == KernelKind::Product; }
  const KernelSpec& domain_part() const;  // self, or the domain factor of a product
  int num_groups() const;
  const std::vector<int>& group(int j) const;
  Decomposition decomposition() const;
  int dim() const { return static_cast<int>(domain_part().coord_kinds.size()); }
};

// Symmetric positive-semidefinite covariance between two queries.
double kernel_eval(const KernelSpec& spec, const KernelHyperparams& hp,
                   const GPInput& a, const GPInput& b);

// Component kernel of group j for additive kernels (plain or inside a
// product): kappa^(j) between a full query and the group coordinates xj.
double kernel_eval_group(const KernelSpec& spec, const KernelHyperparams& hp, int j,
                         const GPInput& a, const Point& xj,
                         const std::optional<FidelityPoint>& fid_b);
double kernel_group_self(const KernelSpec& spec, const KernelHyperparams& hp, int j,
                         const Point& xj, const std::optional<FidelityPoint>& fid_b);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const KernelHyperparams& hp,
                            const std::vector<GPInput>& points);

}  // namespace bbo
