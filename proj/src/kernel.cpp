#include "bbo/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace bbo {

const char* kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExp: return "se";
    case KernelKind::Matern25: return "matern25";
    case KernelKind::Hamming: return "hamming";
    case KernelKind::ExpDecay: return "expdecay";
    case KernelKind::Additive: return "additive";
    case KernelKind::Product: return "product";
  }
  return "?";
}

void Decomposition::validate(int dim) const {
  std::vector<bool> seen(static_cast<std::size_t>(dim), false);
  std::size_t covered = 0;
  for (const auto& g : groups) {
    require(!g.empty(), ErrorCode::InvalidArgument, "decomposition has an empty group");
    require(static_cast<int>(g.size()) <= max_group_size, ErrorCode::InvalidArgument,
            "group exceeds max_group_size");
    for (int i : g) {
      require(i >= 0 && i < dim, ErrorCode::BadGroupIndex, "group index out of range");
      require(!seen[static_cast<std::size_t>(i)], ErrorCode::InvalidArgument,
              "groups are not disjoint");
      seen[static_cast<std::size_t>(i)] = true;
      ++covered;
    }
  }
  require(covered == static_cast<std::size_t>(dim), ErrorCode::InvalidArgument,
          "groups do not cover every coordinate");
}

std::string Decomposition::canonical() const {
  std::vector<std::string> parts;
  for (const auto& g : groups) {
    std::ostringstream os;
    for (std::size_t i = 0; i < g.size(); ++i) os << (i ? "," : "") << g[i];
    parts.push_back(os.str());
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) out += "(" + p + ")";
  return out;
}

Decomposition decomposition_from_ordering(const std::vector<int>& ordering, int p) {
  const int d = static_cast<int>(ordering.size());
  require(p >= 1 && p <= d, ErrorCode::InvalidArgument, "need 1 <= p <= d");
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (int i : ordering) {
    require(i >= 0 && i < d && !seen[static_cast<std::size_t>(i)], ErrorCode::NotAPermutation,
            "ordering is not a permutation of 0..d-1");
    seen[static_cast<std::size_t>(i)] = true;
  }
  Decomposition dec;
  dec.max_group_size = p;
  for (int start = 0; start < d; start += p) {
    const int end = std::min(start + p, d);
    std::vector<int> g(ordering.begin() + start, ordering.begin() + end);
    std::sort(g.begin(), g.end());
    dec.groups.push_back(std::move(g));
  }
  return dec;
}

KernelHyperparams KernelHyperparams::ones(int dim, int fid_dim) {
  KernelHyperparams hp;
  hp.lengthscales.assign(static_cast<std::size_t>(dim), 1.0);
  hp.ham_weights.assign(static_cast<std::size_t>(dim), 1.0);
  hp.fid_scales.assign(static_cast<std::size_t>(fid_dim), 1.0);
  return hp;
}

void KernelHyperparams::validate() const {
  require(scale > 0.0, ErrorCode::InvalidArgument, "kernel scale must be positive");
  require(noise_var >= 0.0, ErrorCode::InvalidArgument, "noise variance must be nonnegative");
  for (double l : lengthscales) {
    require(l > 0.0, ErrorCode::InvalidArgument, "lengthscales must be positive");
  }
  for (double w : ham_weights) {
    require(w >= 0.0, ErrorCode::InvalidArgument, "hamming weights must be nonnegative");
  }
  for (double a : fid_scales) {
    require(a > 0.0, ErrorCode::InvalidArgument, "fidelity kernel parameters must be positive");
  }
}

namespace {

std::vector<VarKind> kinds_of(const Domain& domain) {
  std::vector<VarKind> kinds;
  kinds.reserve(static_cast<std::size_t>(domain.dim()));
  for (const auto& v : domain.variables()) kinds.push_back(v.kind);
  return kinds;
}

}  // namespace

KernelSpec KernelSpec::for_domain(KernelKind base, const Domain& domain) {
  require(base == KernelKind::SquaredExp || base == KernelKind::Matern25 ||
              base == KernelKind::Hamming,
          ErrorCode::UnknownKind, "domain kernels are se, matern25 or hamming");
  KernelSpec spec;
  spec.kind = base;
  spec.coord_kinds = kinds_of(domain);
  return spec;
}

KernelSpec KernelSpec::additive(KernelKind base, const Domain& domain, const Decomposition& dec) {
  dec.validate(domain.dim());
  KernelSpec spec;
  spec.kind = KernelKind::Additive;
  spec.coord_kinds = kinds_of(domain);
  for (const auto& g : dec.groups) {
    KernelSpec sub;
    sub.kind = base;
    sub.coord_kinds = spec.coord_kinds;
    spec.groups.push_back(g);
    spec.subs.push_back(std::move(sub));
  }
  return spec;
}

KernelSpec KernelSpec::fidelity(KernelKind kind, const FidelitySpace& space) {
  require(kind == KernelKind::ExpDecay || kind == KernelKind::SquaredExp ||
              kind == KernelKind::Matern25,
          ErrorCode::UnknownKind, "fidelity kernels are expdecay, se or matern25");
  KernelSpec spec;
  spec.kind = kind;
  spec.coord_kinds.assign(space.variables().size(), VarKind::Euclidean);
  for (const auto& v : space.variables()) {
    double lo = v.lo, hi = v.hi;
    if (v.kind == VarKind::DiscreteNumeric) {
      auto [mn, mx] = std::minmax_element(v.items.begin(), v.items.end());
      lo = *mn;
      hi = *mx;
    }
    spec.fid_lo.push_back(lo);
    spec.fid_hi.push_back(hi > lo ? hi : lo + 1.0);
  }
  for (std::size_t i = 0; i < space.z_hf().size(); ++i) {
    spec.fid_ref.push_back(numeric(space.z_hf()[i]));
  }
  return spec;
}

KernelSpec KernelSpec::product(KernelSpec fidelity_spec, KernelSpec domain_spec) {
  require(!fidelity_spec.fid_ref.empty(), ErrorCode::KindMismatch,
          "product kernels need a fidelity factor");
  KernelSpec spec;
  spec.kind = KernelKind::Product;
  spec.coord_kinds = domain_spec.coord_kinds;
  spec.subs.push_back(std::move(fidelity_spec));
  spec.subs.push_back(std::move(domain_spec));
  return spec;
}

bool KernelSpec::is_additive_form() const {
  if (kind == KernelKind::Additive) return true;
  if (kind == KernelKind::Product) return subs[1].kind == KernelKind::Additive;
  return false;
}

const KernelSpec& KernelSpec::domain_part() const {
  return kind == KernelKind::Product ? subs[1] : *this;
}

int KernelSpec::num_groups() const {
  const KernelSpec& dom = domain_part();
  require(dom.kind == KernelKind::Additive, ErrorCode::NotAdditive, "kernel is not additive");
  return static_cast<int>(dom.groups.size());
}

const std::vector<int>& KernelSpec::group(int j) const {
  const KernelSpec& dom = domain_part();
  require(dom.kind == KernelKind::Additive, ErrorCode::NotAdditive, "kernel is not additive");
  require(j >= 0 && j < static_cast<int>(dom.groups.size()), ErrorCode::BadGroupIndex,
          "group index out of range");
  return dom.groups[static_cast<std::size_t>(j)];
}

Decomposition KernelSpec::decomposition() const {
  const KernelSpec& dom = domain_part();
  require(dom.kind == KernelKind::Additive, ErrorCode::NotAdditive, "kernel is not additive");
  Decomposition dec;
  dec.groups = dom.groups;
  std::size_t p = 1;
  for (const auto& g : dom.groups) p = std::max(p, g.size());
  dec.max_group_size = static_cast<int>(p);
  return dec;
}

namespace {

double matern25_of_r(double r) {
  const double s = std::sqrt(5.0) * r;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

// Unit-normalized factor of the base kernel over the selected coordinates.
// `orig` gives the original coordinate indices (for kind and hyperparameter
// lookup); pos_a/pos_b locate the coordinate inside each point (they differ
// from `orig` when one side is a bare group-coordinate vector).
double base_factor(KernelKind base, const std::vector<VarKind>& kinds,
                   const std::vector<int>& orig, const Point& a,
                   const std::vector<int>& pos_a, const Point& b,
                   const std::vector<int>& pos_b, const KernelHyperparams& hp) {
  double r2 = 0.0;
  double ham_match = 0.0, ham_total = 0.0;
  for (std::size_t k = 0; k < orig.size(); ++k) {
    const std::size_t oi = static_cast<std::size_t>(orig[k]);
    const Value& va = a[static_cast<std::size_t>(pos_a[k])];
    const Value& vb = b[static_cast<std::size_t>(pos_b[k])];
    if (kinds[oi] == VarKind::Discrete) {
      const double w = oi < hp.ham_weights.size() ? hp.ham_weights[oi] : 1.0;
      ham_total += w;
      if (label(va) == label(vb)) ham_match += w;
    } else if (base != KernelKind::Hamming) {
      const double l = oi < hp.lengthscales.size() ? hp.lengthscales[oi] : 1.0;
      const double delta = (numeric(va) - numeric(vb)) / l;
      r2 += delta * delta;
    }
  }
  double factor = 1.0;
  switch (base) {
    case KernelKind::SquaredExp:
      factor = std::exp(-0.5 * r2);
      break;
    case KernelKind::Matern25:
      factor = matern25_of_r(std::sqrt(r2));
      break;
    case KernelKind::Hamming:
      factor = 1.0;
      break;
    default:
      raise(ErrorCode::UnknownKind, "not a base domain kernel");
  }
  if (ham_total > 0.0) factor *= ham_match / ham_total;
  return factor;
}

std::vector<int> identity_indices(std::size_t n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

double fid_factor(const KernelSpec& spec, const KernelHyperparams& hp,
                  const FidelityPoint& za, const FidelityPoint& zb) {
  const std::size_t p = spec.fid_ref.size();
  require(za.size() == p && zb.size() == p, ErrorCode::ArityMismatch,
          "fidelity arity mismatch");
  double factor = 1.0;
  if (spec.kind == KernelKind::ExpDecay) {
    // Product over coordinates of 1/(u + u' + 1)^alpha with u the normalized
    // distance from the reference fidelity, so the factor peaks at 1 there.
    for (std::size_t i = 0; i < p; ++i) {
      const double span = spec.fid_hi[i] - spec.fid_lo[i];
      const double u = std::fabs(numeric(za[i]) - spec.fid_ref[i]) / span;
      const double v = std::fabs(numeric(zb[i]) - spec.fid_ref[i]) / span;
      const double alpha = i < hp.fid_scales.size() ? hp.fid_scales[i] : 1.0;
      factor *= std::pow(u + v + 1.0, -alpha);
    }
    return factor;
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double span = spec.fid_hi[i] - spec.fid_lo[i];
    const double l = i < hp.fid_scales.size() ? hp.fid_scales[i] : 1.0;
    const double delta = (numeric(za[i]) - numeric(zb[i])) / (span * l);
    r2 += delta * delta;
  }
  if (spec.kind == KernelKind::SquaredExp) return std::exp(-0.5 * r2);
  if (spec.kind == KernelKind::Matern25) return matern25_of_r(std::sqrt(r2));
  raise(ErrorCode::UnknownKind, "not a fidelity kernel");
}

double unit_factor(const KernelSpec& spec, const KernelHyperparams& hp,
                   const GPInput& a, const GPInput& b);

double domain_unit_factor(const KernelSpec& spec, const KernelHyperparams& hp,
                          const Point& xa, const Point& xb) {
  require(xa.size() == spec.coord_kinds.size() && xb.size() == spec.coord_kinds.size(),
          ErrorCode::ArityMismatch, "point arity does not match kernel");
  switch (spec.kind) {
    case KernelKind::SquaredExp:
    case KernelKind::Matern25:
    case KernelKind::Hamming: {
      const std::vector<int> all = identity_indices(spec.coord_kinds.size());
      return base_factor(spec.kind, spec.coord_kinds, all, xa, all, xb, all, hp);
    }
    case KernelKind::Additive: {
      const double m = static_cast<double>(spec.groups.size());
      double total = 0.0;
      for (std::size_t j = 0; j < spec.groups.size(); ++j) {
        const auto& g = spec.groups[j];
        total += base_factor(spec.subs[j].kind, spec.coord_kinds, g, xa, g, xb, g, hp) / m;
      }
      return total;
    }
    default:
      raise(ErrorCode::UnknownKind, "not a domain kernel");
  }
}

double unit_factor(const KernelSpec& spec, const KernelHyperparams& hp,
                   const GPInput& a, const GPInput& b) {
  if (spec.kind == KernelKind::Product) {
    require(a.fid.has_value() && b.fid.has_value(), ErrorCode::KindMismatch,
            "product kernel evaluated without fidelities");
    return fid_factor(spec.subs[0], hp, *a.fid, *b.fid) *
           domain_unit_factor(spec.subs[1], hp, a.x, b.x);
  }
  if (!spec.fid_ref.empty()) {
    // Bare fidelity kernel evaluated on fidelity points.
    return fid_factor(spec, hp, a.x, b.x);
  }
  return domain_unit_factor(spec, hp, a.x, b.x);
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const KernelHyperparams& hp,
                   const GPInput& a, const GPInput& b) {
  return hp.scale * unit_factor(spec, hp, a, b);
}

double kernel_eval_group(const KernelSpec& spec, const KernelHyperparams& hp, int j,
                         const GPInput& a, const Point& xj,
                         const std::optional<FidelityPoint>& fid_b) {
  const KernelSpec& dom = spec.domain_part();
  require(dom.kind == KernelKind::Additive, ErrorCode::NotAdditive, "kernel is not additive");
  require(j >= 0 && j < static_cast<int>(dom.groups.size()), ErrorCode::BadGroupIndex,
          "group index out of range");
  const auto& g = dom.groups[static_cast<std::size_t>(j)];
  require(xj.size() == g.size(), ErrorCode::ArityMismatch,
          "group point arity does not match group size");
  const std::vector<int> pos_b = identity_indices(g.size());
  double factor = base_factor(dom.subs[static_cast<std::size_t>(j)].kind, dom.coord_kinds, g,
                              a.x, g, xj, pos_b, hp) /
                  static_cast<double>(dom.groups.size());
  if (spec.kind == KernelKind::Product) {
    require(a.fid.has_value() && fid_b.has_value(), ErrorCode::KindMismatch,
            "product kernel evaluated without fidelities");
    factor *= fid_factor(spec.subs[0], hp, *a.fid, *fid_b);
  }
  return hp.scale * factor;
}

double kernel_group_self(const KernelSpec& spec, const KernelHyperparams& hp, int j,
                         const Point& xj, const std::optional<FidelityPoint>& fid_b) {
  const KernelSpec& dom = spec.domain_part();
  require(dom.kind == KernelKind::Additive, ErrorCode::NotAdditive, "kernel is not additive");
  require(j >= 0 && j < static_cast<int>(dom.groups.size()), ErrorCode::BadGroupIndex,
          "group index out of range");
  const auto& g = dom.groups[static_cast<std::size_t>(j)];
  require(xj.size() == g.size(), ErrorCode::ArityMismatch,
          "group point arity does not match group size");
  const std::vector<int> pos = identity_indices(g.size());
  double factor = base_factor(dom.subs[static_cast<std::size_t>(j)].kind, dom.coord_kinds, g,
                              xj, pos, xj, pos, hp) /
                  static_cast<double>(dom.groups.size());
  if (spec.kind == KernelKind::Product) {
    require(fid_b.has_value(), ErrorCode::KindMismatch,
            "product kernel evaluated without fidelities");
    factor *= fid_factor(spec.subs[0], hp, *fid_b, *fid_b);
  }
  return hp.scale * factor;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const KernelHyperparams& hp,
                            const std::vector<GPInput>& points) {
  require(!points.empty(), ErrorCode::EmptyData, "gram_matrix needs at least one point");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(spec, hp, points[static_cast<std::size_t>(i)],
                                   points[static_cast<std::size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace bbo
