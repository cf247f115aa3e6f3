#include <doctest.h>

#include <cmath>
#include <set>

#include "bbo/benchmarks.hpp"
#include "bbo/orchestrator.hpp"
#include "test_util.hpp"

using namespace bbo;

namespace {

Domain cube(int d) {
  std::vector<VariableSpec> vars;
  for (int i = 0; i < d; ++i) vars.push_back(VariableSpec::euclidean("x" + std::to_string(i), 0, 1));
  return Domain(std::move(vars));
}

double smooth_objective(const Query& q) {
  double v = 0.0;
  for (const auto& c : q.x.coords) {
    const double x = numeric(c);
    v -= (x - 0.6) * (x - 0.6);
  }
  return v;
}

}  // namespace

TEST_CASE("initial design size follows the budget rule") {
  RunOptions opt;
  opt.eval_budget = 200;
  RunState s4(cube(4), std::nullopt, opt);
  CHECK(s4.n_init() == 15);  // min(20, floor(0.075 * 200)) = 15

  opt.eval_budget = 1000;
  RunState s2(cube(2), std::nullopt, opt);
  CHECK(s2.n_init() == 10);  // min(10, 75)

  opt.eval_budget = 10;
  RunState tiny(cube(1), std::nullopt, opt);
  CHECK(tiny.n_init() == 2);  // floor rule would give 0; floor of 2 applies
}

TEST_CASE("same seed gives an identical initial design") {
  RunOptions opt;
  opt.eval_budget = 60;
  opt.seed = 321;
  RunState a(cube(3), std::nullopt, opt);
  RunState b(cube(3), std::nullopt, opt);
  for (int i = 0; i < a.n_init(); ++i) {
    Query qa = a.next_query();
    Query qb = b.next_query();
    CHECK(qa.x == qb.x);
    CHECK(qa.acq_label == "init");
    CHECK(qa.hp_label == "init");
  }
}

TEST_CASE("single-worker runs are bit-reproducible") {
  RunOptions opt;
  opt.eval_budget = 30;
  opt.seed = 11;
  Report r1 = run_bo(cube(2), std::nullopt, smooth_objective, opt);
  Report r2 = run_bo(cube(2), std::nullopt, smooth_objective, opt);
  CHECK(trace_to_jsonl(r1.trace) == trace_to_jsonl(r2.trace));
  CHECK(r1.trace.size() == 30);
  CHECK(r1.completed == 30);
}

TEST_CASE("trace round-trips through jsonl") {
  RunOptions opt;
  opt.eval_budget = 12;
  opt.seed = 5;
  Report rep = run_bo(cube(2), std::nullopt, smooth_objective, opt);
  const std::string text = trace_to_jsonl(rep.trace);
  const auto parsed = trace_from_jsonl(text);
  CHECK(trace_to_jsonl(parsed) == text);
}

TEST_CASE("incumbent trajectory is nondecreasing and capital is exact") {
  RunOptions opt;
  opt.eval_budget = 40;
  opt.seed = 77;
  Report rep = run_bo(cube(2), std::nullopt, smooth_objective, opt);
  double last = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.trace.size(); ++i) {
    CHECK(rep.trace[i].incumbent >= last);
    last = rep.trace[i].incumbent;
    CHECK(rep.trace[i].capital_spent == doctest::Approx(static_cast<double>(i + 1)));
  }
  CHECK(rep.capital_spent == doctest::Approx(40.0));
}

TEST_CASE("weight ledger equals initial mass plus improvements") {
  RunOptions opt;
  opt.eval_budget = 45;
  opt.seed = 13;
  Domain d = cube(2);
  RunState state(d, std::nullopt, opt);
  SimulatedHarness harness(smooth_objective, 1);
  long improvements_post_init = 0;
  double incumbent = -std::numeric_limits<double>::infinity();
  while (state.pending_count() == 0 && state.can_dispatch()) {
    harness.dispatch(state.next_query());
    EvalResult res = harness.wait_any();
    const bool improved = res.y > incumbent;
    if (improved) incumbent = res.y;
    if (improved && res.query.acq_label != "init") ++improvements_post_init;
    state.receive_result(res);
  }
  double acq_mass = 0.0;
  for (double w : state.acq_state().weights) acq_mass += w;
  const double expected_base = static_cast<double>(state.acq_state().enabled.size());
  const double hp_mass = state.hyper_state().w_mml + state.hyper_state().w_sfp;
  CHECK(acq_mass == doctest::Approx(expected_base + improvements_post_init));
  CHECK(hp_mass == doctest::Approx(2.0 + improvements_post_init));
}

TEST_CASE("seventeenth completion refills the hyperparameter queue") {
  RunOptions opt;
  opt.eval_budget = 60;
  opt.seed = 3;
  opt.n_init_override = 4;
  Domain d = cube(1);
  RunState state(d, std::nullopt, opt);
  SimulatedHarness harness(smooth_objective, 1);
  for (int i = 0; i < 17; ++i) {
    harness.dispatch(state.next_query());
    state.receive_result(harness.wait_any());
  }
  CHECK(state.completed() == 17);
  CHECK(state.hyper_state().queue.size() == 17);
}

TEST_CASE("hallucination steers the second concurrent query elsewhere") {
  Domain d({VariableSpec::discrete_numeric("x", {0.0, 0.5, 1.0})});
  RunOptions opt;
  opt.eval_budget = 8;
  opt.seed = 2;
  opt.n_init_override = 2;
  opt.acquisitions = {AcqKind::Ucb};
  RunState state(d, std::nullopt, opt);
  SimulatedHarness harness(smooth_objective, 1);
  for (int i = 0; i < 2; ++i) {
    harness.dispatch(state.next_query());
    state.receive_result(harness.wait_any());
  }
  Query q3 = state.next_query();
  Query q4 = state.next_query();  // q3 still pending: hallucinated posterior
  CHECK_FALSE(q3.x == q4.x);
}

TEST_CASE("failed evaluations are recorded and not retried") {
  RunOptions opt;
  opt.eval_budget = 10;
  opt.seed = 9;
  int calls = 0;
  const Objective flaky = [&calls](const Query& q) {
    ++calls;
    if (q.step == 3) throw std::runtime_error("worker died");
    return smooth_objective(q);
  };
  Report rep = run_bo(cube(1), std::nullopt, flaky, opt);
  CHECK(rep.completed == 10);
  CHECK(rep.failed == 1);
  CHECK(calls == 10);
  int null_y = 0;
  for (const auto& rec : rep.trace) {
    if (!rec.y) ++null_y;
  }
  CHECK(null_y == 1);
}

TEST_CASE("simulated multi-worker runs keep the ledgers exact") {
  for (int workers : {1, 2, 4}) {
    RunOptions opt;
    opt.eval_budget = 25;
    opt.seed = 1000 + workers;
    opt.workers = workers;
    Report rep = run_bo(cube(2), std::nullopt, smooth_objective, opt);
    CHECK(rep.completed == 25);
    CHECK(rep.capital_spent == doctest::Approx(25.0));
    CHECK(rep.trace.size() == 25);
  }
}

TEST_CASE("thread harness completes the same budget") {
  RunOptions opt;
  opt.eval_budget = 18;
  opt.seed = 4;
  opt.workers = 2;
  ThreadHarness harness(smooth_objective, 2);
  Report rep = run_bo(cube(2), std::nullopt, smooth_objective, opt, &harness);
  CHECK(rep.completed == 18);
  CHECK(rep.trace.size() == 18);
}

TEST_CASE("time budget stops dispatching") {
  RunOptions opt;
  opt.eval_budget = 1000;
  opt.time_budget_s = 10.5;  // virtual seconds at unit duration
  opt.seed = 6;
  Report rep = run_bo(cube(1), std::nullopt, smooth_objective, opt);
  CHECK(rep.completed == 11);  // dispatches at t=0..10
}

TEST_CASE("multi-fidelity run bookkeeping") {
  Benchmark bench = benchmark("hartmann3-mf");
  RunOptions opt;
  opt.capital_budget = 30.0;
  opt.seed = 21;
  Report rep = run_bo(bench.domain, bench.fidelity, bench.as_objective(99), opt);

  REQUIRE(!rep.trace.empty());
  double capital = 0.0;
  int at_top = 0, below = 0;
  double incumbent = -std::numeric_limits<double>::infinity();
  for (const auto& rec : rep.trace) {
    REQUIRE(rec.z.has_value());
    capital += bench.fidelity->cost(*rec.z);
    CHECK(rec.capital_spent == doctest::Approx(capital));
    if (*rec.z == bench.fidelity->z_hf()) {
      ++at_top;
      if (rec.y && *rec.y > incumbent) incumbent = *rec.y;
    } else {
      ++below;
    }
    // Incumbent tracks top-fidelity observations only.
    CHECK(rec.incumbent == doctest::Approx(incumbent));
  }
  CHECK(rep.capital_spent == doctest::Approx(capital));
  CHECK(at_top >= 1);
  // Initial ladder guarantees a top-fidelity share of at least a third.
  const int n_init = std::min<int>(15, static_cast<int>(std::floor(0.075 * (30.0 / 1.1))));
  int init_top = 0;
  for (int i = 0; i < n_init && i < static_cast<int>(rep.trace.size()); ++i) {
    // count over dispatch order: init queries are the first n_init dispatches
  }
  (void)init_top;
  CHECK(below >= 1);
}

TEST_CASE("multi-fidelity initial ladder places every third point at z_hf") {
  Benchmark bench = benchmark("hartmann3-mf");
  RunOptions opt;
  opt.capital_budget = 220.0;
  opt.seed = 8;
  RunState state(bench.domain, bench.fidelity, opt);
  const int n_init = state.n_init();
  int top = 0;
  for (int i = 0; i < n_init; ++i) {
    Query q = state.next_query();
    REQUIRE(q.z.has_value());
    if (*q.z == bench.fidelity->z_hf()) ++top;
  }
  CHECK(top >= (n_init + 2) / 3);
}

TEST_CASE("unknown results are rejected") {
  RunOptions opt;
  opt.eval_budget = 5;
  RunState state(cube(1), std::nullopt, opt);
  EvalResult bogus;
  bogus.query.step = 999;
  CHECK(bbo_test::error_code_of([&] { state.receive_result(bogus); }) ==
        ErrorCode::UnknownQuery);
}
