#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "bbo/acquisition.hpp"
#include "bbo/hyper.hpp"
#include "bbo/multi_fidelity.hpp"

namespace bbo {

// One dispatched evaluation: the point, the fidelity in multi-fidelity runs,
// and the acquisition / hyperparameter-strategy labels it was produced with.
struct Query {
  long step = 0;  // dispatch order, 1-based
  Point x;
  std::optional<FidelityPoint> z;
  std::string acq_label = "init";
  std::string hp_label = "init";

  GPInput input() const { return z ? GPInput(*z, x) : GPInput(x); }
};

struct EvalResult {
  Query query;
  double y = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  double wall_time_s = 0.0;
};

// Objectives receive the full query (the dispatch step keeps stochastic
// objectives reproducible under asynchronous completion orders). Throwing
// marks the evaluation failed; the query is recorded and not retried.
using Objective = std::function<double(const Query&)>;

// Evaluation backend: the orchestrator dispatches queries up to capacity and
// consumes completions in whatever order the backend produces them.
class EvalHarness {
 public:
  virtual ~EvalHarness() = default;
  virtual int capacity() const = 0;
  virtual int pending() const = 0;
  virtual void dispatch(const Query& q) = 0;
  virtual EvalResult wait_any() = 0;  // requires pending() > 0
  virtual double now_s() const = 0;
};

// Deterministic harness on a virtual clock: an evaluation occupies a worker
// for `duration(q)` simulated seconds (the fidelity cost by default, 1
// otherwise). Completion order is by finish time, ties by dispatch order.
class SimulatedHarness : public EvalHarness {
 public:
  SimulatedHarness(Objective objective, int workers,
                   std::function<double(const Query&)> duration = {});

  int capacity() const override { return workers_; }
  int pending() const override { return static_cast<int>(busy_.size()); }
  void dispatch(const Query& q) override;
  EvalResult wait_any() override;
  double now_s() const override { return now_; }

 private:
  struct Event {
    double finish;
    long seq;
    Query query;
    bool operator>(const Event& other) const {
      return finish != other.finish ? finish > other.finish : seq > other.seq;
    }
  };
  Objective objective_;
  int workers_;
  std::function<double(const Query&)> duration_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> busy_;
  double now_ = 0.0;
  long seq_ = 0;
};

// Real asynchronous execution on a pool of threads; completions arrive in
// wall-clock order through a queue.
class ThreadHarness : public EvalHarness {
 public:
  ThreadHarness(Objective objective, int workers);
  ~ThreadHarness() override;

  int capacity() const override { return static_cast<int>(threads_.size()); }
  int pending() const override;
  void dispatch(const Query& q) override;
  EvalResult wait_any() override;
  double now_s() const override;

 private:
  void worker_loop();

  Objective objective_;
  std::vector<std::thread> threads_;
  mutable std::mutex mu_;
  std::condition_variable task_cv_, done_cv_;
  std::deque<Query> tasks_;
  std::deque<EvalResult> done_;
  int in_flight_ = 0;
  bool stop_ = false;
  std::chrono::steady_clock::time_point start_;
};

struct RunOptions {
  double eval_budget = 0.0;     // evaluation count budget (single-fidelity)
  double capital_budget = 0.0;  // cost budget (multi-fidelity); 0 derives from eval_budget
  double time_budget_s = 0.0;   // optional wall-clock budget
  int workers = 1;
  std::uint64_t seed = 0;
  std::vector<AcqKind> acquisitions;  // empty: defaults for the domain
  std::optional<bool> use_additive;   // default: true iff add_ucb is enabled
  KernelKind base_kernel = KernelKind::Matern25;
  KernelKind fid_kernel = KernelKind::ExpDecay;
  int p_max = 6;
  int k_decomps = 25;
  int n_cyc = 17;
  double initial_weight = 1.0;  // gamma_0 for both weight vectors
  int n_init_override = 0;
  AcqOptPolicy acq_policy;
};

struct TraceRecord {
  long step = 0;  // completion order, 1-based
  double wall_time_s = 0.0;
  std::optional<FidelityPoint> z;
  Point x;
  std::optional<double> y;
  std::string acq_label;
  std::string hp_label;
  double incumbent = -std::numeric_limits<double>::infinity();
  double capital_spent = 0.0;
};

// Line-delimited JSON with the documented field order
// {step, wall_time_s, z, x, y, acq_label, hp_label, incumbent, capital_spent}.
std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> trace_from_jsonl(const std::string& text);

struct Report {
  std::vector<TraceRecord> trace;
  double best_value = -std::numeric_limits<double>::infinity();
  std::optional<Point> best_point;
  double capital_spent = 0.0;
  long completed = 0;
  long failed = 0;
  double wall_time_s = 0.0;
};

// Algorithm state for one optimization run: initial design, observation
// history, pending (hallucinated) queries, acquisition and hyperparameter
// weights, capital ledger and the trace. Single logical owner; not safe for
// concurrent mutation.
class RunState {
 public:
  RunState(Domain domain, std::optional<FidelitySpace> fidelity, RunOptions options);

  // Next query per the algorithm: remaining initial-design points first, then
  // acquisition maximization on the (hallucinated, except for TS) posterior
  // with freshly drawn hyperparameters and acquisition.
  Query next_query();

  // Folds a completed evaluation into the history, updates the incumbent,
  // weights and capital, and refreshes hyperparameters every n_cyc
  // completions.
  void receive_result(const EvalResult& result);

  bool can_dispatch() const;  // capital/evaluation budget admits another query
  int pending_count() const { return static_cast<int>(pending_.size()); }
  long completed() const { return completed_; }
  double incumbent() const { return incumbent_; }
  double capital_spent() const { return capital_spent_; }
  double capital_inflight() const { return capital_inflight_; }
  int n_init() const { return n_init_; }
  bool is_multi_fidelity() const { return fidelity_.has_value(); }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  const AcqState& acq_state() const { return acq_; }
  const HyperState& hyper_state() const { return hyper_; }
  const Domain& domain() const { return domain_; }
  const std::optional<FidelitySpace>& fidelity() const { return fidelity_; }
  const RunOptions& options() const { return options_; }

  Report report(double wall_time_s) const;

 private:
  double query_cost(const Query& q) const;
  void maybe_refresh();

  Domain domain_;
  std::optional<FidelitySpace> fidelity_;
  RunOptions options_;
  KernelFamily family_;
  AcqState acq_;
  HyperState hyper_;
  Rng rng_;

  std::vector<Query> init_queue_;
  std::size_t init_next_ = 0;
  int n_init_ = 0;

  std::vector<GPInput> inputs_;
  std::vector<double> values_;
  std::vector<Query> pending_;
  std::vector<TraceRecord> trace_;

  long dispatch_step_ = 0;
  long completed_ = 0;
  long failed_ = 0;
  double capital_spent_ = 0.0;
  double capital_inflight_ = 0.0;
  double incumbent_ = -std::numeric_limits<double>::infinity();
  std::optional<Point> best_point_;
};

// Runs the asynchronous loop against the harness (a SimulatedHarness over
// `objective` when none is supplied) until the budget is exhausted, then
// drains pending evaluations.
Report run_bo(const Domain& domain, const std::optional<FidelitySpace>& fidelity,
              const Objective& objective, const RunOptions& options,
              EvalHarness* harness = nullptr);

}  // namespace bbo
