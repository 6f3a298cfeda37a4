#include "graphchain/orchestrator.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"

namespace graphchain {

std::string random_session_id() {
  static thread_local std::random_device device;
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (int i = 0; i < 4; ++i) out << std::setw(8) << static_cast<std::uint32_t>(device());
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return out.str();
}

std::vector<std::string> suggest_questions(const Graph& g) {
  std::vector<std::string> out;
  const auto type = classify_graph(g);
  if (type == "molecule") {
    out = {"What molecules are similar to this graph?", "Which bonds in this molecule look suspicious?",
           "What type of graph is this?"};
  } else if (type == "social") {
    out = {"How many communities or connected components does this network have?",
           "What is the shortest path between two members of this network?", "What is the degree distribution of this network?"};
  }
  out.push_back("How many nodes and edges does this graph have?");
  out.push_back("Summarize this graph in a report.");
  return out;
}

Orchestrator::Orchestrator(const ApiRegistry& registry, const ExemplarStore& exemplars, const GraphStore& store,
                           OrchestratorConfig config, IdGenerator ids, Clock clock)
    : registry_(registry), exemplars_(exemplars), store_(store), config_(std::move(config)), ids_(std::move(ids)),
      clock_(std::move(clock)) {
  config_.rollout.validate();
  if (!config_.log_dir.empty()) {
    std::filesystem::create_directories(config_.log_dir);
    load_logs();
  }
}

Orchestrator::~Orchestrator() {
  std::lock_guard lock(workers_mu_);
  workers_.clear();  // joins
}

void Orchestrator::load_logs() {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(config_.log_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".log") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto slot = std::make_shared<Slot>();
    slot->log = parse_log(detail::read_file(f.string()));
    slot->state = replay(slot->log);
    slot->file = f;
    sessions_.emplace(slot->state.id, std::move(slot));
  }
}

std::shared_ptr<Orchestrator::Slot> Orchestrator::slot(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

void Orchestrator::append(Slot& slot, LogRecord record) {
  record.rec = slot.state.records + 1;
  record.timestamp = clock_();
  if (record.type == LogRecord::Type::step_event) record.event.timestamp = record.timestamp;
  apply(slot.state, record);
  if (!slot.file.empty()) {
    std::ofstream out(slot.file, std::ios::app | std::ios::binary);
    out << record.to_line() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to session log " + slot.file.string());
  }
  slot.log.push_back(std::move(record));
  slot.changed.notify_all();
}

planning::PlanResult Orchestrator::plan(const std::string& question, const Graph& graph, std::uint64_t seed) const {
  const Embedding q = registry_.embed(question);
  if (exemplars_.empty()) throw PlanningError("no exemplar chains are loaded");
  const ReferenceSet refs = reference_chains(q, exemplars_, config_.reference_count);
  auto cfg = config_.rollout;
  cfg.seed = seed;
  return planning::generate_chain(q, graph, registry_, refs, cfg);
}

void Orchestrator::validate_against_registry(const ApiChain& chain) const {
  validate_chain(chain);
  for (std::size_t i = 0; i < chain.steps.size(); ++i)
    if (!registry_.contains(chain.steps[i].api))
      throw ValidationError("step " + std::to_string(i) + " uses unknown api '" + chain.steps[i].api + "'");
}

Session Orchestrator::submit_prompt(const std::string& question, const std::string& graph_document,
                                    std::optional<std::uint64_t> seed) {
  const Graph graph = parse_graph(graph_document);
  const std::uint64_t use_seed = seed.value_or(config_.rollout.seed);
  auto planned = plan(question, graph, use_seed);

  auto slot = std::make_shared<Slot>();
  std::unique_lock map_lock(sessions_mu_);
  std::string id = ids_();
  while (sessions_.contains(id)) id = ids_();
  if (!config_.log_dir.empty()) slot->file = config_.log_dir / (id + ".log");

  std::lock_guard lock(slot->mu);
  LogRecord created;
  created.type = LogRecord::Type::session_created;
  created.id = id;
  created.question = question;
  created.graph_document = serialize_graph(graph);
  created.path_cover = config_.path_cover;
  created.seed = use_seed;
  append(*slot, std::move(created));

  LogRecord proposed;
  proposed.type = LogRecord::Type::chain_proposed;
  proposed.chain = planned.chain;
  append(*slot, std::move(proposed));

  LogRecord ask;
  ask.type = LogRecord::Type::step_event;
  ask.event = StepEvent{slot->state.last_seq() + 1, 0, EventKind::needs_confirmation, format_inline_chain(planned.chain), {}};
  append(*slot, std::move(ask));

  sessions_.emplace(id, slot);
  return slot->state;
}

Session Orchestrator::regenerate(const std::string& id, std::uint64_t seed) {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  if (s->state.status != SessionStatus::proposed)
    throw StateError("session " + id + " is " + std::string(to_string(s->state.status)) + ", not proposed");
  auto planned = plan(s->state.question, *s->state.graph, seed);
  LogRecord proposed;
  proposed.type = LogRecord::Type::chain_proposed;
  proposed.chain = planned.chain;
  append(*s, std::move(proposed));
  LogRecord ask;
  ask.type = LogRecord::Type::step_event;
  ask.event = StepEvent{s->state.last_seq() + 1, 0, EventKind::needs_confirmation, format_inline_chain(planned.chain), {}};
  append(*s, std::move(ask));
  return s->state;
}

Session Orchestrator::confirm_chain(const std::string& id, const std::optional<ApiChain>& edited) {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  if (s->state.status != SessionStatus::proposed)
    throw StateError("session " + id + " is " + std::string(to_string(s->state.status)) + ", not proposed");
  if (edited) {
    ApiChain chain = *edited;
    chain.partial = false;
    validate_against_registry(chain);
    LogRecord rec;
    rec.type = LogRecord::Type::chain_edited;
    rec.chain = std::move(chain);
    append(*s, std::move(rec));
  }
  LogRecord rec;
  rec.type = LogRecord::Type::status_changed;
  rec.status = SessionStatus::confirmed;
  append(*s, std::move(rec));
  return s->state;
}

void Orchestrator::begin(Slot& slot) {
  if (slot.state.status != SessionStatus::confirmed)
    throw StateError("session " + slot.state.id + " is " + std::string(to_string(slot.state.status)) +
                     "; only confirmed chains can be executed");
  LogRecord rec;
  rec.type = LogRecord::Type::status_changed;
  rec.status = SessionStatus::executing;
  append(slot, std::move(rec));
}

std::vector<StepEvent> Orchestrator::run_steps(Slot& slot, const std::function<void(const StepEvent&)>& on_event) {
  ApiChain chain;
  ExecutionContext ctx;
  {
    std::lock_guard lock(slot.mu);
    if (slot.state.status != SessionStatus::executing) throw StateError("session is not executing");
    chain = slot.state.proposed;
    ctx.user_graph = slot.state.graph;
  }
  ctx.store = &store_;
  std::vector<StepEvent> emitted;

  auto emit = [&](std::size_t step, EventKind kind, std::string payload) {
    std::lock_guard lock(slot.mu);
    LogRecord rec;
    rec.type = LogRecord::Type::step_event;
    rec.event = StepEvent{slot.state.last_seq() + 1, step, kind, std::move(payload), {}};
    append(slot, std::move(rec));
    emitted.push_back(slot.state.events.back());
  };
  auto finish = [&](SessionStatus status, std::string report) {
    std::lock_guard lock(slot.mu);
    LogRecord rec;
    rec.type = LogRecord::Type::status_changed;
    rec.status = status;
    rec.report = std::move(report);
    append(slot, std::move(rec));
  };

  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const auto& call = chain.steps[i];
    emit(i, EventKind::started, format_call(call));
    if (on_event) on_event(emitted.back());
    try {
      ApiResult r = execute(registry_, call, ctx);
      emit(i, EventKind::finished, r.render());
      ctx.step_apis.push_back(call.api);
      ctx.outputs.push_back(std::move(r));
    } catch (const std::exception& e) {
      emit(i, EventKind::error, e.what());
      if (on_event) on_event(emitted.back());
      finish(SessionStatus::failed, "step " + std::to_string(i) + " (" + call.api + ") failed: " + e.what());
      return emitted;
    }
    if (on_event) on_event(emitted.back());
  }

  std::string report;
  if (!ctx.outputs.empty() && ctx.outputs.back().kind == ResultKind::report) {
    report = ctx.outputs.back().text;
  } else {
    for (std::size_t i = 0; i < ctx.outputs.size(); ++i)
      report += "step " + std::to_string(i) + " " + ctx.step_apis[i] + ": " + ctx.outputs[i].render() + "\n";
  }
  finish(SessionStatus::done, report.empty() ? "no results\n" : report);
  return emitted;
}

std::vector<StepEvent> Orchestrator::execute_chain(const std::string& id,
                                                   const std::function<void(const StepEvent&)>& on_event) {
  auto s = slot(id);
  {
    std::lock_guard lock(s->mu);
    begin(*s);
  }
  return run_steps(*s, on_event);
}

Session Orchestrator::start_execution(const std::string& id) {
  auto s = slot(id);
  Session snapshot;
  {
    std::lock_guard lock(s->mu);
    begin(*s);
    snapshot = s->state;
  }
  std::lock_guard lock(workers_mu_);
  workers_.emplace_back([this, s] {
    try {
      run_steps(*s, {});
    } catch (const std::exception&) {
      // Step failures are recorded as events; anything else leaves the
      // session executing, which the log shows.
    }
  });
  return snapshot;
}

Session Orchestrator::get_session(const std::string& id) const {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  return s->state;
}

std::vector<Session> Orchestrator::list_sessions() const {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::shared_lock lock(sessions_mu_);
    for (const auto& [id, s] : sessions_) slots.push_back(s);
  }
  std::vector<Session> out;
  for (const auto& s : slots) {
    std::lock_guard lock(s->mu);
    out.push_back(s->state);
  }
  return out;
}

std::vector<StepEvent> Orchestrator::events_since(const std::string& id, std::uint64_t since) const {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  std::vector<StepEvent> out;
  for (const auto& e : s->state.events)
    if (e.seq > since) out.push_back(e);
  return out;
}

Session Orchestrator::wait_for_events(const std::string& id, std::uint64_t since,
                                      std::chrono::milliseconds timeout) const {
  auto s = slot(id);
  std::unique_lock lock(s->mu);
  s->changed.wait_for(lock, timeout, [&] {
    return s->state.last_seq() > since || s->state.status == SessionStatus::done ||
           s->state.status == SessionStatus::failed;
  });
  return s->state;
}

std::string Orchestrator::session_log(const std::string& id) const {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  std::string out;
  for (const auto& r : s->log) out += r.to_line() + "\n";
  return out;
}

}  // namespace graphchain
