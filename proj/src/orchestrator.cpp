#include "bbo/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bbo {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Harnesses.

SimulatedHarness::SimulatedHarness(Objective objective, int workers,
                                   std::function<double(const Query&)> duration)
    : objective_(std::move(objective)), workers_(workers), duration_(std::move(duration)) {
  require(workers_ >= 1, ErrorCode::InvalidArgument, "need at least one worker");
  if (!duration_) {
    duration_ = [](const Query& q) { return 1.0; };
  }
}

void SimulatedHarness::dispatch(const Query& q) {
  require(pending() < workers_, ErrorCode::InvalidArgument, "all workers busy");
  const double dur = std::max(1e-9, duration_(q));
  busy_.push(Event{now_ + dur, seq_++, q});
}

EvalResult SimulatedHarness::wait_any() {
  require(!busy_.empty(), ErrorCode::InvalidArgument, "no pending evaluations");
  Event ev = busy_.top();
  busy_.pop();
  now_ = std::max(now_, ev.finish);
  EvalResult res;
  res.query = ev.query;
  res.wall_time_s = now_;
  try {
    res.y = objective_(ev.query);
    res.failed = !std::isfinite(res.y);
  } catch (const std::exception&) {
    res.failed = true;
  }
  return res;
}

ThreadHarness::ThreadHarness(Objective objective, int workers)
    : objective_(std::move(objective)), start_(std::chrono::steady_clock::now()) {
  require(workers >= 1, ErrorCode::InvalidArgument, "need at least one worker");
  threads_.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) {
    threads_.emplace_back([this] { worker_loop(); });
  }
}

ThreadHarness::~ThreadHarness() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  task_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

int ThreadHarness::pending() const {
  std::lock_guard<std::mutex> lock(mu_);
  return static_cast<int>(tasks_.size() + done_.size()) + in_flight_;
}

void ThreadHarness::dispatch(const Query& q) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    tasks_.push_back(q);
  }
  task_cv_.notify_one();
}

EvalResult ThreadHarness::wait_any() {
  std::unique_lock<std::mutex> lock(mu_);
  done_cv_.wait(lock, [this] { return !done_.empty(); });
  EvalResult res = std::move(done_.front());
  done_.pop_front();
  return res;
}

double ThreadHarness::now_s() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void ThreadHarness::worker_loop() {
  while (true) {
    Query q;
    {
      std::unique_lock<std::mutex> lock(mu_);
      task_cv_.wait(lock, [this] { return stop_ || !tasks_.empty(); });
      if (stop_ && tasks_.empty()) return;
      q = std::move(tasks_.front());
      tasks_.pop_front();
      ++in_flight_;
    }
    EvalResult res;
    res.query = q;
    try {
      res.y = objective_(q);
      res.failed = !std::isfinite(res.y);
    } catch (const std::exception&) {
      res.failed = true;
    }
    res.wall_time_s = now_s();
    {
      std::lock_guard<std::mutex> lock(mu_);
      --in_flight_;
      done_.push_back(std::move(res));
    }
    done_cv_.notify_one();
  }
}

// ---------------------------------------------------------------------------
// Trace serialization.

namespace {

ordered_json value_to_json(const Value& v) {
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  return std::get<std::string>(v);
}

ordered_json point_to_json(const Point& p) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : p.coords) arr.push_back(value_to_json(v));
  return arr;
}

Point point_from_json(const ordered_json& arr) {
  Point p;
  for (const auto& jv : arr) {
    if (jv.is_string()) {
      p.coords.emplace_back(jv.get<std::string>());
    } else if (jv.is_number_integer()) {
      p.coords.emplace_back(jv.get<std::int64_t>());
    } else {
      p.coords.emplace_back(jv.get<double>());
    }
  }
  return p;
}

}  // namespace

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  for (const auto& rec : trace) {
    ordered_json line;
    line["step"] = rec.step;
    line["wall_time_s"] = rec.wall_time_s;
    if (rec.z) line["z"] = point_to_json(*rec.z);
    line["x"] = point_to_json(rec.x);
    if (rec.y) {
      line["y"] = *rec.y;
    } else {
      line["y"] = nullptr;
    }
    line["acq_label"] = rec.acq_label;
    line["hp_label"] = rec.hp_label;
    line["incumbent"] = std::isfinite(rec.incumbent) ? ordered_json(rec.incumbent)
                                                     : ordered_json(nullptr);
    line["capital_spent"] = rec.capital_spent;
    os << line.dump() << "\n";
  }
  return os.str();
}

std::vector<TraceRecord> trace_from_jsonl(const std::string& text) {
  std::vector<TraceRecord> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ordered_json doc;
    try {
      doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::MalformedConfig, std::string("bad trace line: ") + e.what());
    }
    TraceRecord rec;
    rec.step = doc.at("step").get<long>();
    rec.wall_time_s = doc.at("wall_time_s").get<double>();
    if (doc.contains("z")) rec.z = point_from_json(doc.at("z"));
    rec.x = point_from_json(doc.at("x"));
    if (!doc.at("y").is_null()) rec.y = doc.at("y").get<double>();
    rec.acq_label = doc.at("acq_label").get<std::string>();
    rec.hp_label = doc.at("hp_label").get<std::string>();
    rec.incumbent = doc.at("incumbent").is_null()
                        ? -std::numeric_limits<double>::infinity()
                        : doc.at("incumbent").get<double>();
    rec.capital_spent = doc.at("capital_spent").get<double>();
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// RunState.

namespace {

int default_n_init(int dim, double eval_equivalent_budget) {
  int n = 5 * dim;
  if (eval_equivalent_budget > 0) {
    n = std::min(n, static_cast<int>(std::floor(0.075 * eval_equivalent_budget)));
  }
  return std::max(2, n);
}

}  // namespace

RunState::RunState(Domain domain, std::optional<FidelitySpace> fidelity, RunOptions options)
    : domain_(std::move(domain)), fidelity_(std::move(fidelity)), options_(std::move(options)),
      acq_(AcqState::make(options_.acquisitions.empty() ? default_acquisitions(domain_)
                                                        : options_.acquisitions,
                          options_.initial_weight)),
      rng_(make_rng(options_.seed)) {
  require(options_.workers >= 1, ErrorCode::InvalidArgument, "need at least one worker");
  require(options_.eval_budget > 0 || options_.capital_budget > 0 || options_.time_budget_s > 0,
          ErrorCode::InvalidArgument, "need a positive budget");

  if (fidelity_ && options_.capital_budget <= 0 && options_.eval_budget > 0) {
    options_.capital_budget = options_.eval_budget * fidelity_->cost(fidelity_->z_hf());
  }

  bool all_discrete = true;
  for (const auto& v : domain_.variables()) {
    all_discrete = all_discrete && v.kind == VarKind::Discrete;
  }
  const KernelKind base = all_discrete ? KernelKind::Hamming : options_.base_kernel;
  bool additive = options_.use_additive.value_or(false);
  if (!options_.use_additive.has_value()) {
    additive = std::find(acq_.enabled.begin(), acq_.enabled.end(), AcqKind::AddUcb) !=
               acq_.enabled.end();
  }
  if (acq_.enabled.size() == 1 && acq_.enabled[0] == AcqKind::AddUcb) additive = true;
  family_ = additive ? KernelFamily::make_additive(base, domain_, options_.p_max,
                                                   options_.k_decomps, fidelity_,
                                                   options_.fid_kernel)
                     : KernelFamily::plain(base, domain_, fidelity_, options_.fid_kernel);
  hyper_.n_cyc = options_.n_cyc;
  hyper_.w_mml = options_.initial_weight;
  hyper_.w_sfp = options_.initial_weight;

  const double eval_equiv =
      fidelity_ ? (options_.capital_budget > 0
                       ? options_.capital_budget / fidelity_->cost(fidelity_->z_hf())
                       : 0.0)
                : options_.eval_budget;
  n_init_ = options_.n_init_override > 0 ? options_.n_init_override
                                         : default_n_init(domain_.dim(), eval_equiv);

  std::vector<Point> design = sample_init(domain_, n_init_, rng_);

  // Multi-fidelity initialization walks a three-step cost ladder, placing
  // every third point (the first included) at z_hf.
  std::vector<FidelityPoint> ladder;
  if (fidelity_) {
    std::vector<FidelityPoint> grid = fidelity_->candidate_grid();
    std::sort(grid.begin(), grid.end(),
              [&](const FidelityPoint& a, const FidelityPoint& b) {
                return fidelity_->cost(a) < fidelity_->cost(b);
              });
    ladder.push_back(fidelity_->z_hf());
    if (!grid.empty()) {
      ladder.push_back(grid[grid.size() / 2]);
      ladder.push_back(grid.front());
    }
  }
  for (std::size_t i = 0; i < design.size(); ++i) {
    Query q;
    q.x = std::move(design[i]);
    if (fidelity_) q.z = ladder[i % ladder.size()];
    init_queue_.push_back(std::move(q));
  }
}

double RunState::query_cost(const Query& q) const {
  if (!fidelity_) return 1.0;
  require(q.z.has_value(), ErrorCode::KindMismatch, "multi-fidelity query without fidelity");
  return fidelity_->cost(*q.z);
}

bool RunState::can_dispatch() const {
  const double budget = fidelity_ ? options_.capital_budget : options_.eval_budget;
  if (budget <= 0) return true;  // time-budget-only runs
  return capital_spent_ + capital_inflight_ < budget - 1e-12;
}

Query RunState::next_query() {
  Query q;
  if (init_next_ < init_queue_.size()) {
    q = init_queue_[init_next_++];
  } else {
    if (!hyper_.initialized) {
      // Bootstrap before the first scheduled refresh: likelihood optimum
      // only, queue left empty (SFP draws fall back to MML).
      Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
          values_.data(), static_cast<Eigen::Index>(values_.size()));
      hyper_.theta_mml =
          maximize_mll(inputs_, y, family_, build_hyper_bounds(family_, y), rng_);
      hyper_.initialized = true;
    }
    HpDraw draw = choose_hp(hyper_, rng_);
    const AcqKind kind = choose_acquisition(acq_, rng_);

    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
        values_.data(), static_cast<Eigen::Index>(values_.size()));
    GPModel gp = GPModel::fit_centered(family_.spec(draw.theta.decomposition), draw.theta.hp,
                                       inputs_, y);
    acq_.step = completed_ + 1;
    acq_.incumbent = incumbent_;

    // Hallucinate pending queries for every acquisition except TS.
    if (kind != AcqKind::Ts && !pending_.empty()) {
      std::vector<GPInput> pend;
      pend.reserve(pending_.size());
      for (const auto& p : pending_) pend.push_back(p.input());
      gp = gp.hallucinate(pend);
    }

    if (fidelity_) {
      MfQuery mf = mf_point_and_fidelity(gp, domain_, *fidelity_, kind, acq_,
                                         options_.acq_policy, rng_);
      q.x = std::move(mf.x);
      q.z = std::move(mf.z);
    } else {
      OptResult res =
          optimize_acquisition_point(kind, gp, acq_, domain_, options_.acq_policy, rng_);
      q.x = std::move(res.x);
    }
    q.acq_label = acq_kind_name(kind);
    q.hp_label = draw.fallback ? "mml_fallback" : hp_strategy_name(draw.strategy);
  }
  require(domain_.validate_point(q.x), ErrorCode::InvalidArgument,
          "acquisition produced an invalid point");
  q.step = ++dispatch_step_;
  capital_inflight_ += query_cost(q);
  pending_.push_back(q);
  return q;
}

void RunState::maybe_refresh() {
  if (completed_ % hyper_.n_cyc != 0 || inputs_.empty()) return;
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      values_.data(), static_cast<Eigen::Index>(values_.size()));
  refresh_hyper_state(hyper_, inputs_, y, family_, rng_);
}

void RunState::receive_result(const EvalResult& result) {
  const auto it = std::find_if(pending_.begin(), pending_.end(), [&](const Query& q) {
    return q.step == result.query.step;
  });
  require(it != pending_.end(), ErrorCode::UnknownQuery,
          "result for a query that is not pending");
  const Query q = *it;
  pending_.erase(it);

  const double cost = query_cost(q);
  capital_inflight_ = std::max(0.0, capital_inflight_ - cost);
  capital_spent_ += cost;
  ++completed_;
  if (result.failed) ++failed_;

  const bool at_top_fidelity = !fidelity_ || (q.z && *q.z == fidelity_->z_hf());
  if (!result.failed) {
    inputs_.push_back(q.input());
    values_.push_back(result.y);
    if (at_top_fidelity && result.y > incumbent_) {
      incumbent_ = result.y;
      best_point_ = q.x;
      if (q.acq_label != "init") {
        update_weights(acq_, acq_kind_from_name(q.acq_label), true);
        if (q.hp_label == "sfp") {
          hyper_.w_sfp += 1.0;
        } else {
          hyper_.w_mml += 1.0;
        }
      }
    }
  }

  TraceRecord rec;
  rec.step = completed_;
  rec.wall_time_s = result.wall_time_s;
  rec.z = q.z;
  rec.x = q.x;
  if (!result.failed) rec.y = result.y;
  rec.acq_label = q.acq_label;
  rec.hp_label = q.hp_label;
  rec.incumbent = incumbent_;
  rec.capital_spent = capital_spent_;
  trace_.push_back(std::move(rec));

  maybe_refresh();
}

Report RunState::report(double wall_time_s) const {
  Report rep;
  rep.trace = trace_;
  rep.best_value = incumbent_;
  rep.best_point = best_point_;
  rep.capital_spent = capital_spent_;
  rep.completed = completed_;
  rep.failed = failed_;
  rep.wall_time_s = wall_time_s;
  return rep;
}

Report run_bo(const Domain& domain, const std::optional<FidelitySpace>& fidelity,
              const Objective& objective, const RunOptions& options, EvalHarness* harness) {
  RunState state(domain, fidelity, options);

  std::unique_ptr<SimulatedHarness> owned;
  if (harness == nullptr) {
    std::function<double(const Query&)> duration;
    if (fidelity) {
      const FidelitySpace& space = *fidelity;
      duration = [&space](const Query& q) { return space.cost(*q.z); };
    }
    owned = std::make_unique<SimulatedHarness>(objective, options.workers, duration);
    harness = owned.get();
  }

  const auto time_left = [&] {
    return options.time_budget_s <= 0 || harness->now_s() < options.time_budget_s;
  };
  while (true) {
    while (state.pending_count() < harness->capacity() && state.can_dispatch() && time_left()) {
      harness->dispatch(state.next_query());
    }
    if (harness->pending() == 0) break;
    state.receive_result(harness->wait_any());
  }
  return state.report(harness->now_s());
}

}  // namespace bbo
