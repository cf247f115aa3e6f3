#include "bbo/acq_opt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace bbo {

EAConfig EAConfig::for_budget(int total_evals) {
  EAConfig cfg;
  cfg.generations = std::max(
      1, (total_evals - cfg.initial_pool + cfg.mutations_per_generation - 1) /
             cfg.mutations_per_generation);
  return cfg;
}

void EAConfig::validate() const {
  require(initial_pool > 0 && mutations_per_generation > 0 && generations > 0,
          ErrorCode::InvalidArgument, "EA configuration values must be positive");
}

namespace {

struct Candidate {
  Point x;
  double value;
};

Point mutate(const Point& parent, const Domain& domain, Rng& rng) {
  return mutate_point(parent, domain, rng);
}

}  // namespace

Point mutate_point(const Point& parent, const Domain& domain, Rng& rng) {
  Point child = parent;
  const int d = domain.dim();
  const int count = std::min(geometric_mutation_count(rng), d);
  std::vector<int> coords(static_cast<std::size_t>(d));
  std::iota(coords.begin(), coords.end(), 0);
  shuffle(coords, rng);
  for (int c = 0; c < count; ++c) {
    const std::size_t i = static_cast<std::size_t>(coords[static_cast<std::size_t>(c)]);
    const auto& var = domain.variable(i);
    switch (var.kind) {
      case VarKind::Euclidean: {
        const double step = 0.1 * (var.hi - var.lo) * standard_normal(rng);
        child[i] = std::clamp(std::get<double>(child[i]) + step, var.lo, var.hi);
        break;
      }
      case VarKind::Integer: {
        const std::int64_t step = uniform_int(rng, 1, 3) * (uniform01(rng) < 0.5 ? -1 : 1);
        const std::int64_t v = std::get<std::int64_t>(child[i]) + step;
        child[i] = std::clamp(v, static_cast<std::int64_t>(var.lo),
                              static_cast<std::int64_t>(var.hi));
        break;
      }
      case VarKind::Discrete:
        if (uniform01(rng) < 0.5) {
          child[i] = var.labels[uniform_index(rng, var.labels.size())];
        }
        break;
      case VarKind::DiscreteNumeric:
        if (uniform01(rng) < 0.5) {
          child[i] = var.items[uniform_index(rng, var.items.size())];
        }
        break;
    }
  }
  return child;
}

namespace {

// Stochastic parent selection favoring higher acquisition values: softmax
// with temperature equal to the pool's value spread.
std::size_t select_parent(const std::vector<Candidate>& pool, Rng& rng) {
  double mean = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : pool) {
    mean += c.value;
    best = std::max(best, c.value);
  }
  mean /= static_cast<double>(pool.size());
  double var = 0.0;
  for (const auto& c : pool) var += (c.value - mean) * (c.value - mean);
  const double temp = std::sqrt(var / static_cast<double>(pool.size()));
  if (!(temp > 1e-12) || !std::isfinite(temp)) return uniform_index(rng, pool.size());

  std::vector<double> w(pool.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    w[i] = std::exp((pool[i].value - best) / temp);
    total += w[i];
  }
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    u -= w[i];
    if (u <= 0.0) return i;
  }
  return pool.size() - 1;
}

}  // namespace

OptResult maximize_acq_ea(const std::function<double(const Point&)>& f, const Domain& domain,
                          const EAConfig& config, Rng& rng) {
  config.validate();
  constexpr int kRejectionCap = 10000;

  std::vector<Candidate> pool;
  pool.reserve(static_cast<std::size_t>(config.initial_pool));
  int evals = 0;
  for (int i = 0; i < config.initial_pool; ++i) {
    Point p = sample_valid_point(domain, rng, kRejectionCap);
    pool.push_back({std::move(p), 0.0});
    pool.back().value = f(pool.back().x);
    ++evals;
  }

  for (int gen = 0; gen < config.generations; ++gen) {
    std::vector<Candidate> children;
    children.reserve(static_cast<std::size_t>(config.mutations_per_generation));
    for (int m = 0; m < config.mutations_per_generation; ++m) {
      const Candidate& parent = pool[select_parent(pool, rng)];
      Point child;
      int rejections = 0;
      while (true) {
        child = mutate(parent.x, domain, rng);
        if (domain.validate_point(child)) break;
        require(++rejections <= kRejectionCap, ErrorCode::InfeasibleSampling,
                "mutation rejection cap exceeded");
      }
      children.push_back({std::move(child), 0.0});
      children.back().value = f(children.back().x);
      ++evals;
    }
    pool.insert(pool.end(), std::make_move_iterator(children.begin()),
                std::make_move_iterator(children.end()));
  }

  const auto best = std::max_element(pool.begin(), pool.end(),
                                     [](const Candidate& a, const Candidate& b) {
                                       return a.value < b.value;
                                     });
  return {best->x, best->value, evals};
}

namespace {

struct Rect {
  Eigen::VectorXd center;         // in [0,1]^d
  std::vector<int> levels;        // trisection count per dimension
  double value;                   // internal minimization value
  double size;                    // half-diagonal
};

double rect_size(const std::vector<int>& levels) {
  double s = 0.0;
  for (int l : levels) s += std::pow(3.0, -2.0 * l);
  return 0.5 * std::sqrt(s);
}

}  // namespace

DirectResult maximize_direct(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int budget) {
  const int d = static_cast<int>(lo.size());
  require(d >= 1 && hi.size() == lo.size(), ErrorCode::InvalidArgument,
          "maximize_direct needs matching nonempty bounds");
  for (int i = 0; i < d; ++i) {
    require(lo(i) <= hi(i), ErrorCode::InvalidBounds, "maximize_direct needs lo <= hi");
  }
  require(budget >= 3, ErrorCode::InvalidArgument, "maximize_direct needs budget >= 3");
  constexpr double kEpsilon = 1e-4;

  const auto to_user = [&](const Eigen::VectorXd& unit) {
    return (lo.array() + unit.array() * (hi - lo).array()).matrix();
  };
  // Internally minimizes -f.
  const auto eval = [&](const Eigen::VectorXd& unit) { return -f(to_user(unit)); };

  std::vector<Rect> rects;
  Rect root{Eigen::VectorXd::Constant(d, 0.5), std::vector<int>(static_cast<std::size_t>(d), 0),
            0.0, 0.0};
  root.value = eval(root.center);
  root.size = rect_size(root.levels);
  rects.push_back(std::move(root));
  int evals = 1;

  int best_index = 0;
  const auto better = [&](int i, int j) {  // strictly better (smaller value)
    return rects[static_cast<std::size_t>(i)].value < rects[static_cast<std::size_t>(j)].value;
  };

  while (evals + 2 <= budget) {
    // Best rectangle per size class.
    std::map<long long, int> class_best;  // quantized size -> index
    for (int i = 0; i < static_cast<int>(rects.size()); ++i) {
      const long long key = static_cast<long long>(
          std::llround(std::log(rects[static_cast<std::size_t>(i)].size) * 1e9));
      auto it = class_best.find(key);
      if (it == class_best.end() || better(i, it->second)) class_best[key] = i;
    }
    std::vector<int> classes;
    classes.reserve(class_best.size());
    for (const auto& [key, idx] : class_best) classes.push_back(idx);  // ascending size

    const double f_min = rects[static_cast<std::size_t>(best_index)].value;
    std::vector<int> optimal;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const Rect& rk = rects[static_cast<std::size_t>(classes[k])];
      double k_lo = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const Rect& ri = rects[static_cast<std::size_t>(classes[i])];
        k_lo = std::max(k_lo, (rk.value - ri.value) / (rk.size - ri.size));
      }
      double k_hi = std::numeric_limits<double>::infinity();
      for (std::size_t i = k + 1; i < classes.size(); ++i) {
        const Rect& ri = rects[static_cast<std::size_t>(classes[i])];
        k_hi = std::min(k_hi, (ri.value - rk.value) / (ri.size - rk.size));
      }
      if (k_lo > k_hi) continue;
      if (std::isfinite(k_hi) &&
          rk.value - k_hi * rk.size > f_min - kEpsilon * std::fabs(f_min)) {
        continue;
      }
      optimal.push_back(classes[k]);
    }
    if (optimal.empty()) optimal.push_back(classes.back());
    rects.reserve(rects.size() + 2 * optimal.size());

    bool split_any = false;
    for (int idx : optimal) {
      if (evals + 2 > budget) break;
      Rect& parent = rects[static_cast<std::size_t>(idx)];
      // Trisect along the lowest-indexed longest side.
      int dim = 0;
      for (int i = 1; i < d; ++i) {
        if (parent.levels[static_cast<std::size_t>(i)] <
            parent.levels[static_cast<std::size_t>(dim)]) {
          dim = i;
        }
      }
      const double third = std::pow(3.0, -(parent.levels[static_cast<std::size_t>(dim)] + 1));
      parent.levels[static_cast<std::size_t>(dim)] += 1;
      parent.size = rect_size(parent.levels);
      for (double offset : {-third, third}) {
        Rect child = parent;
        child.center(dim) = parent.center(dim) + offset;
        child.value = eval(child.center);
        ++evals;
        rects.push_back(std::move(child));
        if (rects.back().value < rects[static_cast<std::size_t>(best_index)].value) {
          best_index = static_cast<int>(rects.size()) - 1;
        }
      }
      split_any = true;
    }
    if (!split_any) break;
  }

  const Rect& best = rects[static_cast<std::size_t>(best_index)];
  return {to_user(best.center), -best.value, evals};
}

OptResult maximize_exhaustive(const std::function<double(const Point&)>& f, const Domain& domain,
                              std::size_t cap) {
  const std::vector<Point> points = domain.enumerate(cap);
  require(!points.empty(), ErrorCode::InfeasibleSampling, "no valid point in the finite domain");
  OptResult best{points.front(), -std::numeric_limits<double>::infinity(), 0};
  for (const Point& p : points) {
    const double v = f(p);
    ++best.evals;
    if (v > best.value) {
      best.value = v;
      best.x = p;
    }
  }
  return best;
}

int AcqOptPolicy::effective_budget(int dim) const {
  return budget > 0 ? budget : std::max(500, 50 * dim);
}

OptResult optimize_on_domain(const std::function<double(const Point&)>& f, const Domain& domain,
                             const AcqOptPolicy& policy, Rng& rng) {
  if (domain.finite_size(policy.exhaustive_cap) > 0) {
    return maximize_exhaustive(f, domain, policy.exhaustive_cap);
  }
  const int budget = policy.effective_budget(domain.dim());
  bool all_euclidean = true;
  for (const auto& v : domain.variables()) {
    all_euclidean = all_euclidean && v.kind == VarKind::Euclidean;
  }
  if (all_euclidean && !domain.has_constraint() && domain.dim() <= policy.direct_dim_cap) {
    Eigen::VectorXd lo(domain.dim()), hi(domain.dim());
    for (int i = 0; i < domain.dim(); ++i) {
      lo(i) = domain.variable(static_cast<std::size_t>(i)).lo;
      hi(i) = domain.variable(static_cast<std::size_t>(i)).hi;
    }
    DirectResult res = maximize_direct(
        [&](const Eigen::VectorXd& x) {
          Point p;
          p.coords.reserve(static_cast<std::size_t>(x.size()));
          for (Eigen::Index i = 0; i < x.size(); ++i) p.coords.emplace_back(x(i));
          return f(p);
        },
        lo, hi, budget);
    Point p;
    for (Eigen::Index i = 0; i < res.x.size(); ++i) p.coords.emplace_back(res.x(i));
    return {std::move(p), res.value, res.evals};
  }
  return maximize_acq_ea(f, domain, EAConfig::for_budget(budget), rng);
}

}  // namespace bbo
