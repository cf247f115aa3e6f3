#include "bbo/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "bbo/acq_opt.hpp"

namespace bbo {

namespace {

std::vector<double> reals_of(const Point& p) {
  std::vector<double> x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = numeric(p[i]);
  return x;
}

// Canonical test functions, stated in maximization form. Recorded optima were
// computed by dense grid search plus local refinement and are frozen here.

double branin_max(const std::vector<double>& v) {
  const double x1 = v[0], x2 = v[1];
  const double a = 1.0, b = 5.1 / (4.0 * M_PI * M_PI), c = 5.0 / M_PI;
  const double r = 6.0, s = 10.0, t = 1.0 / (8.0 * M_PI);
  const double term = x2 - b * x1 * x1 + c * x1 - r;
  return -(a * term * term + s * (1.0 - t) * std::cos(x1) + s);
}

double hartmann(const std::vector<double>& x, int d, const double* a, const double* p) {
  static const std::array<double, 4> alpha = {1.0, 1.2, 3.0, 3.2};
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = x[static_cast<std::size_t>(j)] - p[i * d + j];
      inner += a[i * d + j] * diff * diff;
    }
    total += alpha[static_cast<std::size_t>(i)] * std::exp(-inner);
  }
  return total;
}

double hartmann3(const std::vector<double>& x) {
  static const double a[12] = {3, 10, 30, 0.1, 10, 35, 3, 10, 30, 0.1, 10, 35};
  static const double p[12] = {0.3689, 0.1170, 0.2673, 0.4699, 0.4387, 0.7470,
                               0.1091, 0.8732, 0.5547, 0.0381, 0.5743, 0.8828};
  return hartmann(x, 3, a, p);
}

double hartmann6(const std::vector<double>& x) {
  static const double a[24] = {10,  3,   17,  3.5, 1.7, 8,  0.05, 10,  17, 0.1, 8,  14,
                               3,   3.5, 1.7, 10,  17,  8,  17,   8,   0.05, 10, 0.1, 14};
  static const double p[24] = {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886,
                               0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991,
                               0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650,
                               0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381};
  return hartmann(x, 6, a, p);
}

double park1(const std::vector<double>& v) {
  const double x1 = v[0], x2 = v[1], x3 = v[2], x4 = v[3];
  const double c = (x2 + x3 * x3) * x4;
  double first;
  if (x1 < 1e-10) {
    first = std::sqrt(c) / 2.0;  // limit as x1 -> 0
  } else {
    first = x1 / 2.0 * (std::sqrt(1.0 + c / (x1 * x1)) - 1.0);
  }
  return first + (x1 + 3.0 * x4) * std::exp(1.0 + std::sin(x3));
}

double park2(const std::vector<double>& v) {
  return 2.0 / 3.0 * std::exp(v[0] + v[1]) - v[3] * std::sin(v[2]) + v[2];
}

double borehole(const std::vector<double>& v) {
  const double rw = v[0], r = v[1], tu = v[2], hu = v[3];
  const double tl = v[4], hl = v[5], length = v[6], kw = v[7];
  const double lnr = std::log(r / rw);
  return 2.0 * M_PI * tu * (hu - hl) /
         (lnr * (1.0 + 2.0 * length * tu / (lnr * rw * rw * kw) + tu / tl));
}

struct BaseFunction {
  std::string name;
  std::vector<std::pair<double, double>> bounds;
  std::function<double(const std::vector<double>&)> f;
  double f_opt;
};

const std::vector<BaseFunction>& base_catalog() {
  static const std::vector<BaseFunction> catalog = {
      {"branin", {{-5, 10}, {0, 15}}, branin_max, -0.39788735772973816},
      {"hartmann3", {{0, 1}, {0, 1}, {0, 1}}, hartmann3, 3.862779787332663},
      {"hartmann6", {{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}}, hartmann6,
       3.322368011415515},
      {"park1", {{0, 1}, {0, 1}, {0, 1}, {0, 1}}, park1, 25.589254158606547},
      {"park2", {{0, 1}, {0, 1}, {0, 1}, {0, 1}}, park2, 5.9260373992871},
      {"borehole",
       {{0.05, 0.15}, {100, 50000}, {63070, 115600}, {990, 1110}, {63.1, 116}, {700, 820},
        {1120, 1680}, {9855, 12045}},
       borehole, 309.5755876604079},
  };
  return catalog;
}

struct ConstrainedVariant {
  std::string base;
  std::string expression;  // over x1..xd
  double f_opt;
};

const std::vector<ConstrainedVariant>& constrained_catalog() {
  static const std::vector<ConstrainedVariant> catalog = {
      {"hartmann3", "x1^2 + x2^2 <= 0.5", 3.862779787332663},
      {"park1", "x1 + x2 <= 1.2", 25.464848603531674},
      {"borehole", "((x1 - 0.05) / 0.1)^2 + ((x8 - 9855) / 2190)^2 <= 1", 258.0989369396039},
  };
  return catalog;
}

// Range of f over its box, estimated once per benchmark from a fixed-seed
// uniform sample; noise widths and fidelity biases are scaled from it.
double estimate_range(const std::function<double(const std::vector<double>&)>& f,
                      const std::vector<std::pair<double, double>>& bounds) {
  Rng rng = make_rng(0xb0b0cafeULL);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> x(bounds.size());
  for (int i = 0; i < 100000; ++i) {
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      x[j] = uniform(rng, bounds[j].first, bounds[j].second);
    }
    const double v = f(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

struct ParsedName {
  std::string base;
  int stack = 1;
  bool constrained = false;
  bool noisy = false;
  bool mf = false;
};

ParsedName parse_name(const std::string& name) {
  ParsedName parsed;
  std::stringstream ss(name);
  std::string token;
  bool first = true;
  while (std::getline(ss, token, '-')) {
    if (first) {
      parsed.base = token;
      first = false;
      const auto xpos = token.rfind('x');
      if (xpos != std::string::npos && xpos + 1 < token.size()) {
        const std::string suffix = token.substr(xpos + 1);
        if (!suffix.empty() && suffix.find_first_not_of("0123456789") == std::string::npos) {
          parsed.base = token.substr(0, xpos);
          parsed.stack = std::stoi(suffix);
        }
      }
    } else if (token == "constrained") {
      parsed.constrained = true;
    } else if (token == "noisy") {
      parsed.noisy = true;
    } else if (token == "mf") {
      parsed.mf = true;
    } else {
      raise(ErrorCode::UnknownBenchmark, "unknown benchmark suffix '-" + token + "'");
    }
  }
  require(!parsed.base.empty() && parsed.stack >= 1, ErrorCode::UnknownBenchmark,
          "cannot parse benchmark name '" + name + "'");
  return parsed;
}

}  // namespace

double Benchmark::true_value(const std::optional<FidelityPoint>& z, const Point& x) const {
  if (z && g) return g(*z, x);
  return f(x);
}

Objective Benchmark::as_objective(std::uint64_t noise_seed) const {
  const Benchmark self = *this;  // objectives outlive the catalog entry
  return [self, noise_seed](const Query& q) {
    double y = self.true_value(q.z, q.x);
    if (self.noise_sigma > 0.0) {
      Rng rng = derive_rng(noise_seed, static_cast<std::uint64_t>(q.step));
      y += self.noise_sigma * standard_normal(rng);
    }
    return y;
  };
}

Benchmark benchmark(const std::string& name) {
  const ParsedName parsed = parse_name(name);
  const BaseFunction* base = nullptr;
  for (const auto& b : base_catalog()) {
    if (b.name == parsed.base) base = &b;
  }
  require(base != nullptr, ErrorCode::UnknownBenchmark, "unknown benchmark '" + name + "'");

  Benchmark bench;
  bench.name = name;

  // Stacked variants sum `stack` copies of the base over consecutive groups.
  const int base_dim = static_cast<int>(base->bounds.size());
  const int d = base_dim * parsed.stack;
  std::vector<VariableSpec> vars;
  std::vector<std::pair<double, double>> bounds;
  for (int k = 0; k < parsed.stack; ++k) {
    for (int j = 0; j < base_dim; ++j) {
      const auto [lo, hi] = base->bounds[static_cast<std::size_t>(j)];
      vars.push_back(VariableSpec::euclidean("x" + std::to_string(k * base_dim + j + 1), lo, hi));
      bounds.emplace_back(lo, hi);
    }
  }
  bench.domain = Domain(std::move(vars));

  const auto base_f = base->f;
  const int stack = parsed.stack;
  auto stacked = [base_f, base_dim, stack](const std::vector<double>& x) {
    double total = 0.0;
    std::vector<double> block(static_cast<std::size_t>(base_dim));
    for (int k = 0; k < stack; ++k) {
      for (int j = 0; j < base_dim; ++j) {
        block[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(k * base_dim + j)];
      }
      total += base_f(block);
    }
    return total;
  };
  bench.f = [stacked](const Point& p) { return stacked(reals_of(p)); };
  bench.f_opt = base->f_opt * parsed.stack;

  if (parsed.constrained) {
    require(parsed.stack == 1, ErrorCode::UnknownBenchmark,
            "constrained variants are defined for unstacked functions");
    const ConstrainedVariant* cv = nullptr;
    for (const auto& c : constrained_catalog()) {
      if (c.base == parsed.base) cv = &c;
    }
    require(cv != nullptr, ErrorCode::UnknownBenchmark,
            "no constrained variant of '" + parsed.base + "'");
    bench.domain.set_constraint(Expr::parse(cv->expression, bench.domain.variable_names()));
    bench.f_opt = cv->f_opt;
  }

  const double range = estimate_range(stacked, bounds);
  if (parsed.noisy) bench.noise_sigma = 0.05 * range;

  if (parsed.mf) {
    // g(z, x) = f(x) - a (1 - z) h(x): a smooth bias of amplitude a (10% of
    // the range) that vanishes at the top fidelity z_hf = 1; cost(z) = z + 0.1.
    FidelityPoint z_hf = Point::real({1.0});
    std::vector<std::string> fnames = {"z"};
    Expr cost = Expr::parse("z + 0.1", fnames);
    bench.fidelity = FidelitySpace(
        {VariableSpec::euclidean("z", 0.0, 1.0)}, z_hf,
        [cost](const FidelityPoint& z) { return cost.eval_numeric(z); }, cost);
    const double amplitude = 0.1 * range;
    const auto f_fn = bench.f;
    const auto domain_bounds = bounds;
    bench.g = [f_fn, amplitude, domain_bounds](const FidelityPoint& z, const Point& p) {
      const std::vector<double> x = reals_of(p);
      double mean_norm = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const auto [lo, hi] = domain_bounds[i];
        mean_norm += (x[i] - lo) / (hi - lo);
      }
      mean_norm /= static_cast<double>(x.size());
      const double h = 0.5 * (1.0 - std::cos(M_PI * mean_norm));
      return f_fn(p) - amplitude * (1.0 - numeric(z[0])) * h;
    };
  }
  return bench;
}

std::vector<std::string> benchmark_names() {
  std::vector<std::string> names;
  for (const auto& b : base_catalog()) names.push_back(b.name);
  names.push_back("hartmann3x6");
  names.push_back("hartmann6x3");
  for (const auto& c : constrained_catalog()) names.push_back(c.base + "-constrained");
  for (const auto& b : base_catalog()) names.push_back(b.name + "-noisy");
  for (const auto& b : base_catalog()) names.push_back(b.name + "-mf");
  return names;
}

namespace {

bool counts_for_regret(const Benchmark& bench, const TraceRecord& rec) {
  if (!rec.y) return false;
  if (!bench.fidelity) return true;
  return rec.z && *rec.z == bench.fidelity->z_hf();
}

}  // namespace

std::vector<double> simple_regret(const std::vector<TraceRecord>& trace, double f_opt,
                                  const Benchmark& bench) {
  std::vector<double> curve;
  curve.reserve(trace.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& rec : trace) {
    if (counts_for_regret(bench, rec)) {
      best = std::max(best, bench.f(rec.x));
    }
    curve.push_back(std::isfinite(best) ? std::max(0.0, f_opt - best)
                                        : std::numeric_limits<double>::infinity());
  }
  return curve;
}

std::vector<double> best_value_curve(const std::vector<TraceRecord>& trace,
                                     const Benchmark& bench) {
  std::vector<double> curve;
  curve.reserve(trace.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& rec : trace) {
    if (counts_for_regret(bench, rec)) best = std::max(best, bench.f(rec.x));
    curve.push_back(best);
  }
  return curve;
}

namespace {

TraceRecord make_baseline_record(long step, const Point& x,
                                 const std::optional<FidelityPoint>& z,
                                 const std::optional<double>& y, const char* label,
                                 double& incumbent, double cost, double& capital) {
  capital += cost;
  if (y && *y > incumbent) incumbent = *y;
  TraceRecord rec;
  rec.step = step;
  rec.wall_time_s = capital;
  rec.z = z;
  rec.x = x;
  rec.y = y;
  rec.acq_label = label;
  rec.hp_label = "none";
  rec.incumbent = incumbent;
  rec.capital_spent = capital;
  return rec;
}

}  // namespace

std::vector<TraceRecord> random_search(const Domain& domain, int budget, Rng& rng,
                                       const Objective* objective,
                                       const std::optional<FidelitySpace>& fidelity) {
  require(budget >= 1, ErrorCode::InvalidArgument, "need budget >= 1");
  std::vector<TraceRecord> trace;
  trace.reserve(static_cast<std::size_t>(budget));
  double incumbent = -std::numeric_limits<double>::infinity();
  double capital = 0.0;
  const std::optional<FidelityPoint> z =
      fidelity ? std::optional<FidelityPoint>(fidelity->z_hf()) : std::nullopt;
  const double cost = fidelity ? fidelity->cost(fidelity->z_hf()) : 1.0;
  for (int i = 0; i < budget; ++i) {
    Query q;
    q.step = i + 1;
    q.x = sample_valid_point(domain, rng, 100 * std::max(1, budget));
    q.z = z;
    q.acq_label = "random";
    std::optional<double> y;
    if (objective) y = (*objective)(q);
    trace.push_back(make_baseline_record(i + 1, q.x, z, y, "random", incumbent, cost, capital));
  }
  return trace;
}

std::vector<TraceRecord> ea_search(const Domain& domain, int budget, Rng& rng,
                                   const Objective& objective,
                                   const std::optional<FidelitySpace>& fidelity) {
  require(budget >= 1, ErrorCode::InvalidArgument, "need budget >= 1");
  std::vector<TraceRecord> trace;
  trace.reserve(static_cast<std::size_t>(budget));
  double incumbent = -std::numeric_limits<double>::infinity();
  double capital = 0.0;
  const std::optional<FidelityPoint> z =
      fidelity ? std::optional<FidelityPoint>(fidelity->z_hf()) : std::nullopt;
  const double cost = fidelity ? fidelity->cost(fidelity->z_hf()) : 1.0;

  struct Candidate {
    Point x;
    double value;
  };
  std::vector<Candidate> pool;
  long step = 0;
  const auto evaluate = [&](const Point& x) {
    Query q;
    q.step = ++step;
    q.x = x;
    q.z = z;
    q.acq_label = "ea";
    const double y = objective(q);
    trace.push_back(make_baseline_record(step, x, z, y, "ea", incumbent, cost, capital));
    pool.push_back({x, y});
    return y;
  };

  const int init = std::min(20, budget);
  for (int i = 0; i < init; ++i) evaluate(sample_valid_point(domain, rng, 10000));

  while (step < budget) {
    // Softmax selection over the pool, temperature = value spread.
    double mean = 0.0, best = -std::numeric_limits<double>::infinity();
    for (const auto& c : pool) {
      mean += c.value;
      best = std::max(best, c.value);
    }
    mean /= static_cast<double>(pool.size());
    double var = 0.0;
    for (const auto& c : pool) var += (c.value - mean) * (c.value - mean);
    const double temp = std::sqrt(var / static_cast<double>(pool.size()));
    std::size_t pick = uniform_index(rng, pool.size());
    if (temp > 1e-12 && std::isfinite(temp)) {
      std::vector<double> w(pool.size());
      double total = 0.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        w[i] = std::exp((pool[i].value - best) / temp);
        total += w[i];
      }
      double u = uniform01(rng) * total;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        u -= w[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    Point child;
    int rejections = 0;
    while (true) {
      child = mutate_point(pool[pick].x, domain, rng);
      if (domain.validate_point(child)) break;
      require(++rejections <= 10000, ErrorCode::InfeasibleSampling,
              "mutation rejection cap exceeded");
    }
    evaluate(child);
  }
  return trace;
}

}  // namespace bbo
