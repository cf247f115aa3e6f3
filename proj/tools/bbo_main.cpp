// Command-line front end: runs the optimizer, random search or the
// evolutionary baseline on a catalog benchmark or a user config, writing a
// trace file and a regret summary.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bbo/benchmarks.hpp"

namespace {

using nlohmann::ordered_json;

struct CliArgs {
  std::string benchmark_name;
  std::string config_path;
  double budget = 0.0;
  double capital = 0.0;
  double time_budget_s = 0.0;
  std::string method = "bo";
  int workers = 1;
  std::string acquisitions;
  std::uint64_t seed = 0;
  std::string out = "trace.jsonl";
  std::string summary;
  double noise = -1.0;
  bool mf = false;
  std::string kernel = "matern25";
};

std::vector<bbo::AcqKind> parse_acquisitions(const std::string& csv) {
  std::vector<bbo::AcqKind> kinds;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) kinds.push_back(bbo::acq_kind_from_name(token));
  }
  return kinds;
}

struct Problem {
  bbo::Domain domain;
  std::optional<bbo::FidelitySpace> fidelity;
  std::optional<bbo::Benchmark> bench;  // set for catalog benchmarks
  std::optional<bbo::Objective> objective;
};

Problem load_problem(const CliArgs& args) {
  Problem problem;
  if (!args.benchmark_name.empty()) {
    std::string name = args.benchmark_name;
    if (args.mf && name.find("-mf") == std::string::npos) name += "-mf";
    bbo::Benchmark bench = bbo::benchmark(name);
    if (args.noise > 0.0) bench.noise_sigma = args.noise;
    problem.domain = bench.domain;
    problem.fidelity = bench.fidelity;
    problem.objective = bench.as_objective(args.seed ^ 0x5eedULL);
    problem.bench = std::move(bench);
    return problem;
  }
  std::ifstream in(args.config_path);
  bbo::require(in.good(), bbo::ErrorCode::MalformedConfig,
               "cannot read config file '" + args.config_path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  auto [domain, fidelity] = bbo::parse_domain(text);
  problem.domain = std::move(domain);
  problem.fidelity = std::move(fidelity);

  // Optional "objective" expression over (fidelity variables +) domain
  // variables lets the config drive bo/ea runs end to end.
  const auto doc = nlohmann::json::parse(text);
  if (doc.contains("objective")) {
    std::vector<std::string> names;
    if (problem.fidelity) {
      for (const auto& v : problem.fidelity->variables()) names.push_back(v.name);
    }
    for (const auto& v : problem.domain.variables()) names.push_back(v.name);
    bbo::Expr expr = bbo::Expr::parse(doc["objective"].get<std::string>(), names);
    const double noise = args.noise > 0.0 ? args.noise : 0.0;
    const std::uint64_t seed = args.seed ^ 0x5eedULL;
    problem.objective = [expr, noise, seed](const bbo::Query& q) {
      bbo::Point joined;
      if (q.z) {
        joined.coords.insert(joined.coords.end(), q.z->coords.begin(), q.z->coords.end());
      }
      joined.coords.insert(joined.coords.end(), q.x.coords.begin(), q.x.coords.end());
      double y = expr.eval_numeric(joined);
      if (noise > 0.0) {
        bbo::Rng rng = bbo::derive_rng(seed, static_cast<std::uint64_t>(q.step));
        y += noise * bbo::standard_normal(rng);
      }
      return y;
    };
  }
  return problem;
}

void write_summary(const std::string& path, const std::vector<bbo::TraceRecord>& trace,
                   const Problem& problem) {
  std::ofstream out(path);
  bbo::require(out.good(), bbo::ErrorCode::MalformedConfig,
               "cannot write summary file '" + path + "'");
  std::vector<double> regret;
  std::vector<double> best;
  if (problem.bench && problem.bench->f_opt) {
    regret = bbo::simple_regret(trace, *problem.bench->f_opt, *problem.bench);
  }
  if (problem.bench) best = bbo::best_value_curve(trace, *problem.bench);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    ordered_json line;
    line["n"] = trace[i].step;
    line["capital"] = trace[i].capital_spent;
    if (!regret.empty()) {
      line["simple_regret"] = std::isfinite(regret[i]) ? ordered_json(regret[i])
                                                       : ordered_json(nullptr);
    } else if (trace[i].y || std::isfinite(trace[i].incumbent)) {
      line["best_value"] = std::isfinite(trace[i].incumbent)
                               ? ordered_json(trace[i].incumbent)
                               : ordered_json(nullptr);
    }
    if (!best.empty()) {
      line["best_true_value"] =
          std::isfinite(best[i]) ? ordered_json(best[i]) : ordered_json(nullptr);
    }
    out << line.dump() << "\n";
  }
}

int run_command(const CliArgs& args) {
  Problem problem = load_problem(args);
  bbo::Rng rng = bbo::make_rng(args.seed);

  std::vector<bbo::TraceRecord> trace;
  if (args.method == "random") {
    const int budget = static_cast<int>(args.budget > 0 ? args.budget : 100);
    const bbo::Objective* obj = problem.objective ? &*problem.objective : nullptr;
    trace = bbo::random_search(problem.domain, budget, rng, obj, problem.fidelity);
  } else if (args.method == "ea") {
    bbo::require(problem.objective.has_value(), bbo::ErrorCode::MalformedConfig,
                 "method 'ea' needs an objective (benchmark or config objective)");
    const int budget = static_cast<int>(args.budget > 0 ? args.budget : 100);
    trace = bbo::ea_search(problem.domain, budget, rng, *problem.objective, problem.fidelity);
  } else if (args.method == "bo") {
    bbo::require(problem.objective.has_value(), bbo::ErrorCode::MalformedConfig,
                 "method 'bo' needs an objective (benchmark or config objective)");
    bbo::RunOptions options;
    options.eval_budget = args.budget;
    options.capital_budget = args.capital;
    options.time_budget_s = args.time_budget_s;
    options.workers = args.workers;
    options.seed = args.seed;
    options.base_kernel = args.kernel == "se" ? bbo::KernelKind::SquaredExp
                                              : bbo::KernelKind::Matern25;
    if (!args.acquisitions.empty()) options.acquisitions = parse_acquisitions(args.acquisitions);
    bbo::Report report = bbo::run_bo(problem.domain, problem.fidelity, *problem.objective,
                                     options, nullptr);
    trace = std::move(report.trace);
  } else {
    bbo::raise(bbo::ErrorCode::MalformedConfig, "unknown method '" + args.method + "'");
  }

  std::ofstream out(args.out);
  bbo::require(out.good(), bbo::ErrorCode::MalformedConfig,
               "cannot write trace file '" + args.out + "'");
  out << bbo::trace_to_jsonl(trace);
  const std::string summary_path =
      args.summary.empty() ? args.out + ".summary.jsonl" : args.summary;
  write_summary(summary_path, trace, problem);
  std::cout << "wrote " << trace.size() << " records to " << args.out << " (summary: "
            << summary_path << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization engine for expensive black-box functions"};
  app.require_subcommand(1);

  CliArgs args;
  CLI::App* run = app.add_subcommand("run", "optimize a benchmark or config");
  auto* bench_opt = run->add_option("--benchmark", args.benchmark_name,
                                    "catalog benchmark name (see list-benchmarks)");
  auto* config_opt =
      run->add_option("--config", args.config_path, "domain config file (JSON)");
  bench_opt->excludes(config_opt);
  run->add_option("--budget", args.budget, "evaluation budget");
  run->add_option("--capital", args.capital, "capital budget (multi-fidelity cost units)");
  run->add_option("--time-budget-s", args.time_budget_s, "wall-clock budget in seconds");
  run->add_option("--method", args.method, "bo | random | ea")->default_val("bo");
  run->add_option("--workers", args.workers, "asynchronous workers")->default_val(1);
  run->add_option("--acquisitions", args.acquisitions,
                  "comma-separated list: ucb,ei,ts,ttei,pi,add_ucb");
  run->add_option("--seed", args.seed, "random seed")->default_val(0);
  run->add_option("--out", args.out, "trace output path")->default_val("trace.jsonl");
  run->add_option("--summary", args.summary, "regret summary path (default <out>.summary.jsonl)");
  run->add_option("--noise", args.noise, "gaussian observation noise width");
  run->add_flag("--mf", args.mf, "use the multi-fidelity variant of the benchmark");
  run->add_option("--kernel", args.kernel, "matern25 | se")->default_val("matern25");

  CLI::App* list = app.add_subcommand("list-benchmarks", "print catalog benchmark names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (list->parsed()) {
      for (const auto& name : bbo::benchmark_names()) std::cout << name << "\n";
      return 0;
    }
    if (run->parsed()) {
      if (args.benchmark_name.empty() && args.config_path.empty()) {
        std::cerr << "error: need --benchmark or --config\n";
        return 2;
      }
      if (args.budget <= 0 && args.capital <= 0 && args.time_budget_s <= 0) {
        std::cerr << "error: need --budget, --capital or --time-budget-s\n";
        return 2;
      }
      return run_command(args);
    }
  } catch (const bbo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool config_error = e.code() == bbo::ErrorCode::MalformedConfig ||
                              e.code() == bbo::ErrorCode::UnknownBenchmark ||
                              e.code() == bbo::ErrorCode::UnknownKind ||
                              e.code() == bbo::ErrorCode::InvalidBounds ||
                              e.code() == bbo::ErrorCode::UnknownLabel ||
                              e.code() == bbo::ErrorCode::ZHfOutOfSpace;
    return config_error ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
