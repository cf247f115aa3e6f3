#include "bbo/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bbo {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* var_kind_name(VarKind kind) {
  switch (kind) {
    case VarKind::Euclidean: return "euclidean";
    case VarKind::Integer: return "integer";
    case VarKind::Discrete: return "discrete";
    case VarKind::DiscreteNumeric: return "discrete_numeric";
  }
  return "?";
}

VarKind var_kind_from_name(const std::string& name) {
  if (name == "euclidean") return VarKind::Euclidean;
  if (name == "integer") return VarKind::Integer;
  if (name == "discrete") return VarKind::Discrete;
  if (name == "discrete_numeric") return VarKind::DiscreteNumeric;
  raise(ErrorCode::UnknownKind, "unknown variable kind '" + name + "'");
}

std::string to_string(const Value& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  std::ostringstream os;
  os.precision(17);
  if (std::holds_alternative<std::int64_t>(v)) {
    os << std::get<std::int64_t>(v);
  } else {
    os << std::get<double>(v);
  }
  return os.str();
}

std::string to_string(const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += to_string(p[i]);
  }
  return s + ")";
}

VariableSpec VariableSpec::euclidean(std::string name, double lo, double hi) {
  VariableSpec v;
  v.name = std::move(name);
  v.kind = VarKind::Euclidean;
  v.lo = lo;
  v.hi = hi;
  v.validate();
  return v;
}

VariableSpec VariableSpec::integer(std::string name, std::int64_t lo, std::int64_t hi) {
  VariableSpec v;
  v.name = std::move(name);
  v.kind = VarKind::Integer;
  v.lo = static_cast<double>(lo);
  v.hi = static_cast<double>(hi);
  v.validate();
  return v;
}

VariableSpec VariableSpec::discrete(std::string name, std::vector<std::string> labels) {
  VariableSpec v;
  v.name = std::move(name);
  v.kind = VarKind::Discrete;
  v.labels = std::move(labels);
  v.validate();
  return v;
}

VariableSpec VariableSpec::discrete_numeric(std::string name, std::vector<double> items) {
  VariableSpec v;
  v.name = std::move(name);
  v.kind = VarKind::DiscreteNumeric;
  v.items = std::move(items);
  v.validate();
  return v;
}

void VariableSpec::validate() const {
  switch (kind) {
    case VarKind::Euclidean:
    case VarKind::Integer:
      require(lo < hi, ErrorCode::InvalidBounds,
              "variable '" + name + "' needs lo < hi");
      break;
    case VarKind::Discrete: {
      require(!labels.empty(), ErrorCode::InvalidBounds,
              "variable '" + name + "' has no items");
      std::set<std::string> uniq(labels.begin(), labels.end());
      require(uniq.size() == labels.size(), ErrorCode::InvalidBounds,
              "variable '" + name + "' has duplicate items");
      break;
    }
    case VarKind::DiscreteNumeric: {
      require(!items.empty(), ErrorCode::InvalidBounds,
              "variable '" + name + "' has no items");
      std::set<double> uniq(items.begin(), items.end());
      require(uniq.size() == items.size(), ErrorCode::InvalidBounds,
              "variable '" + name + "' has duplicate items");
      break;
    }
  }
}

bool VariableSpec::value_in_bounds(const Value& v) const {
  switch (kind) {
    case VarKind::Euclidean:
      if (!std::holds_alternative<double>(v)) return false;
      return std::get<double>(v) >= lo && std::get<double>(v) <= hi;
    case VarKind::Integer: {
      if (!std::holds_alternative<std::int64_t>(v)) return false;
      const double iv = static_cast<double>(std::get<std::int64_t>(v));
      return iv >= lo && iv <= hi;
    }
    case VarKind::Discrete:
      if (!std::holds_alternative<std::string>(v)) return false;
      return std::find(labels.begin(), labels.end(), std::get<std::string>(v)) != labels.end();
    case VarKind::DiscreteNumeric:
      if (!std::holds_alternative<double>(v)) return false;
      return std::find(items.begin(), items.end(), std::get<double>(v)) != items.end();
  }
  return false;
}

double VariableSpec::numeric_range() const {
  switch (kind) {
    case VarKind::Euclidean:
    case VarKind::Integer:
      return hi - lo;
    case VarKind::Discrete:
      return 1.0;
    case VarKind::DiscreteNumeric: {
      auto [mn, mx] = std::minmax_element(items.begin(), items.end());
      double r = *mx - *mn;
      return r > 0 ? r : 1.0;
    }
  }
  return 1.0;
}

std::size_t VariableSpec::item_count() const {
  switch (kind) {
    case VarKind::Euclidean: return 0;
    case VarKind::Integer: {
      const double span = hi - lo + 1;
      return span > 1e15 ? 0 : static_cast<std::size_t>(span);
    }
    case VarKind::Discrete: return labels.size();
    case VarKind::DiscreteNumeric: return items.size();
  }
  return 0;
}

Domain::Domain(std::vector<VariableSpec> vars) : vars_(std::move(vars)) {
  for (const auto& v : vars_) v.validate();
}

void Domain::set_constraint(Expr expr) {
  constraint_expr_ = expr;
  constraint_ = [expr](const Point& p) { return expr.eval_bool(p); };
}

void Domain::set_constraint(ConstraintFn fn) {
  constraint_expr_.reset();
  constraint_ = std::move(fn);
}

std::vector<std::string> Domain::variable_names() const {
  std::vector<std::string> names;
  names.reserve(vars_.size());
  for (const auto& v : vars_) names.push_back(v.name);
  return names;
}

bool Domain::validate_point(const Point& p) const {
  require(p.size() == vars_.size(), ErrorCode::ArityMismatch,
          "point has " + std::to_string(p.size()) + " coords, domain has " +
              std::to_string(vars_.size()));
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (!vars_[i].value_in_bounds(p[i])) return false;
  }
  if (constraint_ && !constraint_(p)) return false;
  return true;
}

Domain Domain::restrict(const std::vector<int>& coord_indices) const {
  std::vector<VariableSpec> sub;
  sub.reserve(coord_indices.size());
  for (int i : coord_indices) {
    require(i >= 0 && i < dim(), ErrorCode::BadGroupIndex, "coordinate index out of range");
    sub.push_back(vars_[static_cast<std::size_t>(i)]);
  }
  return Domain(std::move(sub));
}

std::size_t Domain::finite_size(std::size_t cap) const {
  std::size_t total = 1;
  for (const auto& v : vars_) {
    const std::size_t c = v.item_count();
    if (c == 0) return 0;
    if (total > cap / c + 1) return 0;
    total *= c;
    if (total > cap) return 0;
  }
  return total;
}

std::vector<Point> Domain::enumerate(std::size_t cap) const {
  const std::size_t total = finite_size(cap);
  require(total > 0, ErrorCode::InvalidArgument, "domain is not finitely enumerable");
  std::vector<Point> points;
  points.reserve(total);
  Point cur;
  cur.coords.resize(vars_.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == vars_.size()) {
      if (validate_point(cur)) points.push_back(cur);
      return;
    }
    const auto& v = vars_[i];
    switch (v.kind) {
      case VarKind::Integer:
        for (std::int64_t k = static_cast<std::int64_t>(v.lo);
             k <= static_cast<std::int64_t>(v.hi); ++k) {
          cur.coords[i] = k;
          rec(i + 1);
        }
        break;
      case VarKind::Discrete:
        for (const auto& s : v.labels) {
          cur.coords[i] = s;
          rec(i + 1);
        }
        break;
      case VarKind::DiscreteNumeric:
        for (double x : v.items) {
          cur.coords[i] = x;
          rec(i + 1);
        }
        break;
      case VarKind::Euclidean:
        raise(ErrorCode::InvalidArgument, "euclidean variable is not enumerable");
    }
  };
  rec(0);
  return points;
}

Point Domain::uniform_point(Rng& rng) const {
  Point p;
  p.coords.resize(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    switch (v.kind) {
      case VarKind::Euclidean:
        p.coords[i] = uniform(rng, v.lo, v.hi);
        break;
      case VarKind::Integer:
        p.coords[i] = uniform_int(rng, static_cast<std::int64_t>(v.lo),
                                  static_cast<std::int64_t>(v.hi));
        break;
      case VarKind::Discrete:
        p.coords[i] = v.labels[uniform_index(rng, v.labels.size())];
        break;
      case VarKind::DiscreteNumeric:
        p.coords[i] = v.items[uniform_index(rng, v.items.size())];
        break;
    }
  }
  return p;
}

FidelitySpace::FidelitySpace(std::vector<VariableSpec> vars, FidelityPoint z_hf,
                             std::function<double(const FidelityPoint&)> cost,
                             std::optional<Expr> cost_expr)
    : vars_(std::move(vars)), z_hf_(std::move(z_hf)), cost_(std::move(cost)),
      cost_expr_(std::move(cost_expr)) {
  for (const auto& v : vars_) {
    v.validate();
    require(v.kind != VarKind::Discrete, ErrorCode::UnknownKind,
            "fidelity variable '" + v.name + "' must be numeric");
  }
  require(contains(z_hf_), ErrorCode::ZHfOutOfSpace, "z_hf lies outside the fidelity space");
  require(cost_ != nullptr, ErrorCode::InvalidArgument, "fidelity space needs a cost function");
  require(cost_(z_hf_) > 0.0, ErrorCode::InvalidArgument, "cost(z_hf) must be positive");
}

double FidelitySpace::cost(const FidelityPoint& z) const {
  const double c = cost_(z);
  require(c > 0.0, ErrorCode::InvalidArgument, "cost must be positive, got " + std::to_string(c));
  return c;
}

bool FidelitySpace::contains(const FidelityPoint& z) const {
  if (z.size() != vars_.size()) return false;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (!vars_[i].value_in_bounds(z[i])) return false;
  }
  return true;
}

std::vector<double> FidelitySpace::normalized(const FidelityPoint& z) const {
  require(z.size() == vars_.size(), ErrorCode::ArityMismatch, "fidelity arity mismatch");
  std::vector<double> out(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    double lo = v.lo, hi = v.hi;
    if (v.kind == VarKind::DiscreteNumeric) {
      auto [mn, mx] = std::minmax_element(v.items.begin(), v.items.end());
      lo = *mn;
      hi = *mx;
    }
    const double span = hi - lo;
    out[i] = span > 0 ? (numeric(z[i]) - lo) / span : 0.0;
  }
  return out;
}

std::vector<FidelityPoint> FidelitySpace::candidate_grid(int per_dim) const {
  std::vector<std::vector<Value>> axis(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    switch (v.kind) {
      case VarKind::Euclidean:
        for (int k = 0; k < per_dim; ++k) {
          axis[i].emplace_back(v.lo + (v.hi - v.lo) * k / (per_dim - 1.0));
        }
        break;
      case VarKind::Integer: {
        std::set<std::int64_t> vals;
        for (int k = 0; k < per_dim; ++k) {
          const double x = v.lo + (v.hi - v.lo) * k / (per_dim - 1.0);
          vals.insert(static_cast<std::int64_t>(std::llround(x)));
        }
        for (std::int64_t x : vals) axis[i].emplace_back(x);
        break;
      }
      case VarKind::DiscreteNumeric:
        for (double x : v.items) axis[i].emplace_back(x);
        break;
      case VarKind::Discrete:
        break;  // excluded by the constructor
    }
  }
  std::vector<FidelityPoint> grid;
  Point cur;
  cur.coords.resize(vars_.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (grid.size() >= 4096) return;
    if (i == vars_.size()) {
      grid.push_back(cur);
      return;
    }
    for (const auto& v : axis[i]) {
      cur.coords[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  if (std::find(grid.begin(), grid.end(), z_hf_) == grid.end()) grid.push_back(z_hf_);
  return grid;
}

namespace {

VariableSpec variable_from_json(const json& jv) {
  require(jv.is_object(), ErrorCode::MalformedConfig, "variable entry must be an object");
  for (auto it = jv.begin(); it != jv.end(); ++it) {
    const std::string& k = it.key();
    require(k == "name" || k == "kind" || k == "bounds" || k == "items",
            ErrorCode::MalformedConfig, "unknown key '" + k + "' in variable");
  }
  require(jv.contains("name") && jv["name"].is_string(), ErrorCode::MalformedConfig,
          "variable needs a string 'name'");
  require(jv.contains("kind") && jv["kind"].is_string(), ErrorCode::MalformedConfig,
          "variable needs a string 'kind'");
  const std::string name = jv["name"].get<std::string>();
  const VarKind kind = var_kind_from_name(jv["kind"].get<std::string>());
  switch (kind) {
    case VarKind::Euclidean:
    case VarKind::Integer: {
      require(jv.contains("bounds") && jv["bounds"].is_array() && jv["bounds"].size() == 2,
              ErrorCode::MalformedConfig, "variable '" + name + "' needs bounds [lo, hi]");
      const double lo = jv["bounds"][0].get<double>();
      const double hi = jv["bounds"][1].get<double>();
      if (kind == VarKind::Euclidean) return VariableSpec::euclidean(name, lo, hi);
      return VariableSpec::integer(name, static_cast<std::int64_t>(lo),
                                   static_cast<std::int64_t>(hi));
    }
    case VarKind::Discrete: {
      require(jv.contains("items") && jv["items"].is_array(), ErrorCode::MalformedConfig,
              "variable '" + name + "' needs an items list");
      std::vector<std::string> labels;
      for (const auto& item : jv["items"]) {
        require(item.is_string(), ErrorCode::MalformedConfig,
                "discrete items must be strings");
        labels.push_back(item.get<std::string>());
      }
      return VariableSpec::discrete(name, std::move(labels));
    }
    case VarKind::DiscreteNumeric: {
      require(jv.contains("items") && jv["items"].is_array(), ErrorCode::MalformedConfig,
              "variable '" + name + "' needs an items list");
      std::vector<double> items;
      for (const auto& item : jv["items"]) {
        require(item.is_number(), ErrorCode::MalformedConfig,
                "discrete_numeric items must be numbers");
        items.push_back(item.get<double>());
      }
      return VariableSpec::discrete_numeric(name, std::move(items));
    }
  }
  raise(ErrorCode::UnknownKind, "unreachable");
}

Value fidelity_value_from_json(const VariableSpec& var, const json& jv) {
  require(jv.is_number(), ErrorCode::MalformedConfig, "z_hf entries must be numbers");
  if (var.kind == VarKind::Integer) return static_cast<std::int64_t>(jv.get<double>());
  return jv.get<double>();
}

}  // namespace

std::pair<Domain, std::optional<FidelitySpace>> parse_domain(const std::string& config_text) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::exception& e) {
    raise(ErrorCode::MalformedConfig, e.what());
  }
  require(doc.is_object(), ErrorCode::MalformedConfig, "config root must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    require(k == "variables" || k == "constraint" || k == "fidelity" || k == "objective",
            ErrorCode::MalformedConfig, "unknown key '" + k + "' in config");
  }
  require(doc.contains("variables") && doc["variables"].is_array() && !doc["variables"].empty(),
          ErrorCode::MalformedConfig, "config needs a non-empty 'variables' list");

  std::vector<VariableSpec> vars;
  for (const auto& jv : doc["variables"]) vars.push_back(variable_from_json(jv));
  Domain domain(std::move(vars));

  if (doc.contains("constraint")) {
    require(doc["constraint"].is_string(), ErrorCode::MalformedConfig,
            "'constraint' must be an expression string");
    domain.set_constraint(
        Expr::parse(doc["constraint"].get<std::string>(), domain.variable_names()));
  }

  std::optional<FidelitySpace> fidelity;
  if (doc.contains("fidelity")) {
    const json& jf = doc["fidelity"];
    require(jf.is_object(), ErrorCode::MalformedConfig, "'fidelity' must be an object");
    for (auto it = jf.begin(); it != jf.end(); ++it) {
      const std::string& k = it.key();
      require(k == "variables" || k == "z_hf" || k == "cost",
              ErrorCode::MalformedConfig, "unknown key '" + k + "' in fidelity");
    }
    require(jf.contains("variables") && jf["variables"].is_array() && !jf["variables"].empty(),
            ErrorCode::MalformedConfig, "fidelity needs a 'variables' list");
    require(jf.contains("z_hf") && jf["z_hf"].is_array(), ErrorCode::MalformedConfig,
            "fidelity needs 'z_hf'");
    require(jf.contains("cost") && jf["cost"].is_string(), ErrorCode::MalformedConfig,
            "fidelity needs a 'cost' expression");
    std::vector<VariableSpec> fvars;
    for (const auto& jv : jf["variables"]) fvars.push_back(variable_from_json(jv));
    require(jf["z_hf"].size() == fvars.size(), ErrorCode::MalformedConfig,
            "z_hf arity does not match fidelity variables");
    FidelityPoint z_hf;
    for (std::size_t i = 0; i < fvars.size(); ++i) {
      z_hf.coords.push_back(fidelity_value_from_json(fvars[i], jf["z_hf"][i]));
    }
    std::vector<std::string> fnames;
    for (const auto& v : fvars) fnames.push_back(v.name);
    Expr cost = Expr::parse(jf["cost"].get<std::string>(), fnames);
    auto cost_fn = [cost](const FidelityPoint& z) { return cost.eval_numeric(z); };
    fidelity.emplace(std::move(fvars), std::move(z_hf), std::move(cost_fn), cost);
  }
  return {std::move(domain), std::move(fidelity)};
}

std::string serialize_domain(const Domain& domain, const std::optional<FidelitySpace>& fidelity) {
  ordered_json doc;
  auto var_to_json = [](const VariableSpec& v) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["kind"] = var_kind_name(v.kind);
    switch (v.kind) {
      case VarKind::Euclidean:
        jv["bounds"] = {v.lo, v.hi};
        break;
      case VarKind::Integer:
        jv["bounds"] = {static_cast<std::int64_t>(v.lo), static_cast<std::int64_t>(v.hi)};
        break;
      case VarKind::Discrete:
        jv["items"] = v.labels;
        break;
      case VarKind::DiscreteNumeric:
        jv["items"] = v.items;
        break;
    }
    return jv;
  };
  doc["variables"] = ordered_json::array();
  for (const auto& v : domain.variables()) doc["variables"].push_back(var_to_json(v));
  if (domain.constraint_expr()) doc["constraint"] = domain.constraint_expr()->source();
  if (fidelity) {
    ordered_json jf;
    jf["variables"] = ordered_json::array();
    for (const auto& v : fidelity->variables()) jf["variables"].push_back(var_to_json(v));
    jf["z_hf"] = ordered_json::array();
    for (const auto& v : fidelity->z_hf().coords) {
      if (std::holds_alternative<std::int64_t>(v)) {
        jf["z_hf"].push_back(std::get<std::int64_t>(v));
      } else {
        jf["z_hf"].push_back(numeric(v));
      }
    }
    require(fidelity->cost_expr().has_value(), ErrorCode::InvalidArgument,
            "cannot serialize a fidelity space with a programmatic cost function");
    jf["cost"] = fidelity->cost_expr()->source();
    doc["fidelity"] = std::move(jf);
  }
  return doc.dump(2);
}

std::vector<Point> sample_init(const Domain& domain, int n, Rng& rng) {
  require(n >= 1, ErrorCode::InvalidArgument, "sample_init needs n >= 1");
  const int d = domain.dim();

  // Per latin-hypercube dimension: a bin permutation; each point then jitters
  // inside its own bin so redraws keep the one-sample-per-bin marginal.
  std::vector<std::vector<int>> bins;
  std::vector<int> lhs_dims;
  for (int i = 0; i < d; ++i) {
    const VarKind kind = domain.variable(static_cast<std::size_t>(i)).kind;
    if (kind == VarKind::Euclidean || kind == VarKind::Integer) {
      std::vector<int> perm(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) perm[static_cast<std::size_t>(k)] = k;
      shuffle(perm, rng);
      bins.push_back(std::move(perm));
      lhs_dims.push_back(i);
    }
  }

  auto draw_point = [&](int row, bool keep_bins) {
    Point p;
    p.coords.resize(static_cast<std::size_t>(d));
    std::size_t lhs_slot = 0;
    for (int i = 0; i < d; ++i) {
      const auto& v = domain.variable(static_cast<std::size_t>(i));
      switch (v.kind) {
        case VarKind::Euclidean:
        case VarKind::Integer: {
          const int bin = keep_bins ? bins[lhs_slot][static_cast<std::size_t>(row)]
                                    : static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
          const double u = (bin + uniform01(rng)) / n;
          const double x = v.lo + u * (v.hi - v.lo);
          if (v.kind == VarKind::Euclidean) {
            p.coords[static_cast<std::size_t>(i)] = x;
          } else {
            // Ties at bin edges round down.
            std::int64_t iv = static_cast<std::int64_t>(std::ceil(x - 0.5));
            iv = std::max<std::int64_t>(static_cast<std::int64_t>(v.lo),
                                        std::min<std::int64_t>(static_cast<std::int64_t>(v.hi), iv));
            p.coords[static_cast<std::size_t>(i)] = iv;
          }
          ++lhs_slot;
          break;
        }
        case VarKind::Discrete:
          p.coords[static_cast<std::size_t>(i)] = v.labels[uniform_index(rng, v.labels.size())];
          break;
        case VarKind::DiscreteNumeric:
          p.coords[static_cast<std::size_t>(i)] = v.items[uniform_index(rng, v.items.size())];
          break;
      }
    }
    return p;
  };

  const long rejection_cap = 100L * n;
  long consecutive_rejections = 0;
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int row = 0; row < n; ++row) {
    // First try within the row's own LHS bins; fall back to free bins if the
    // constraint never admits this bin combination.
    constexpr int kInBinAttempts = 64;
    int attempt = 0;
    while (true) {
      Point p = draw_point(row, attempt < kInBinAttempts);
      if (domain.validate_point(p)) {
        out.push_back(std::move(p));
        consecutive_rejections = 0;
        break;
      }
      ++attempt;
      require(++consecutive_rejections <= rejection_cap, ErrorCode::InfeasibleSampling,
              "constraint rejected " + std::to_string(consecutive_rejections) +
                  " consecutive initial-design candidates");
    }
  }
  return out;
}

Point sample_valid_point(const Domain& domain, Rng& rng, int max_attempts) {
  for (int i = 0; i < max_attempts; ++i) {
    Point p = domain.uniform_point(rng);
    if (domain.validate_point(p)) return p;
  }
  raise(ErrorCode::InfeasibleSampling,
        "no valid point found in " + std::to_string(max_attempts) + " attempts");
}

}  // namespace bbo
