#include "graphchain/session.hpp"

#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"

namespace graphchain {

using json = nlohmann::json;

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::proposed: return "proposed";
    case SessionStatus::confirmed: return "confirmed";
    case SessionStatus::executing: return "executing";
    case SessionStatus::done: return "done";
    case SessionStatus::failed: return "failed";
  }
  return "proposed";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::started: return "started";
    case EventKind::finished: return "finished";
    case EventKind::error: return "error";
    case EventKind::needs_confirmation: return "needs_confirmation";
  }
  return "started";
}

SessionStatus parse_status(std::string_view s) {
  for (auto v : {SessionStatus::proposed, SessionStatus::confirmed, SessionStatus::executing, SessionStatus::done,
                 SessionStatus::failed})
    if (to_string(v) == s) return v;
  throw ParseError(0, "unknown session status '" + std::string(s) + "'");
}

EventKind parse_event_kind(std::string_view s) {
  for (auto v : {EventKind::started, EventKind::finished, EventKind::error, EventKind::needs_confirmation})
    if (to_string(v) == s) return v;
  throw ParseError(0, "unknown event kind '" + std::string(s) + "'");
}

bool transition_allowed(SessionStatus from, SessionStatus to) {
  switch (from) {
    case SessionStatus::proposed: return to == SessionStatus::confirmed;
    case SessionStatus::confirmed: return to == SessionStatus::executing;
    case SessionStatus::executing: return to == SessionStatus::done || to == SessionStatus::failed;
    default: return false;
  }
}

bool operator==(const Session& a, const Session& b) {
  const bool graphs = (a.graph && b.graph) ? *a.graph == *b.graph : a.graph == b.graph;
  return graphs && a.id == b.id && a.question == b.question && a.graph_document == b.graph_document &&
         a.path_cover.max_length == b.path_cover.max_length && a.path_cover.minimize == b.path_cover.minimize &&
         a.seed == b.seed && a.sequences.base_sequences == b.sequences.base_sequences &&
         a.sequences.super_sequences == b.sequences.super_sequences && a.sequences.base_paths == b.sequences.base_paths &&
         a.sequences.super_paths == b.sequences.super_paths && a.proposed == b.proposed && a.status == b.status &&
         a.events == b.events && a.report == b.report && a.edits == b.edits && a.records == b.records;
}

std::string_view to_string(LogRecord::Type t) {
  switch (t) {
    case LogRecord::Type::session_created: return "session-created";
    case LogRecord::Type::chain_proposed: return "chain-proposed";
    case LogRecord::Type::chain_edited: return "chain-edited";
    case LogRecord::Type::status_changed: return "status-changed";
    case LogRecord::Type::step_event: return "step-event";
  }
  return "";
}

json LogRecord::to_json() const {
  json j{{"rec", rec}, {"type", to_string(type)}};
  switch (type) {
    case Type::session_created:
      j["id"] = id;
      j["question"] = question;
      j["graph"] = graph_document;
      j["path_length"] = path_cover.max_length;
      j["minimize"] = path_cover.minimize;
      j["seed"] = seed;
      break;
    case Type::chain_proposed:
    case Type::chain_edited: j["chain"] = serialize_chain(chain); break;
    case Type::status_changed:
      j["status"] = to_string(status);
      if (!report.empty()) j["report"] = report;
      break;
    case Type::step_event:
      j["seq"] = event.seq;
      j["step"] = event.step_index;
      j["kind"] = to_string(event.kind);
      j["payload"] = event.payload;
      break;
  }
  j["ts"] = timestamp;
  return j;
}

LogRecord LogRecord::from_json(const json& j) {
  LogRecord r;
  try {
    r.rec = j.at("rec").get<std::uint64_t>();
    r.timestamp = j.value("ts", "");
    const auto type = j.at("type").get<std::string>();
    if (type == "session-created") {
      r.type = Type::session_created;
      r.id = j.at("id").get<std::string>();
      r.question = j.at("question").get<std::string>();
      r.graph_document = j.at("graph").get<std::string>();
      r.path_cover.max_length = j.at("path_length").get<std::size_t>();
      r.path_cover.minimize = j.at("minimize").get<bool>();
      r.seed = j.at("seed").get<std::uint64_t>();
    } else if (type == "chain-proposed" || type == "chain-edited") {
      r.type = type == "chain-proposed" ? Type::chain_proposed : Type::chain_edited;
      r.chain = parse_chain(j.at("chain").get<std::string>());
    } else if (type == "status-changed") {
      r.type = Type::status_changed;
      r.status = parse_status(j.at("status").get<std::string>());
      r.report = j.value("report", "");
    } else if (type == "step-event") {
      r.type = Type::step_event;
      r.event.seq = j.at("seq").get<std::uint64_t>();
      r.event.step_index = j.at("step").get<std::size_t>();
      r.event.kind = parse_event_kind(j.at("kind").get<std::string>());
      r.event.payload = j.at("payload").get<std::string>();
      r.event.timestamp = r.timestamp;
    } else {
      throw ParseError(0, "unknown record type '" + type + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed log record: ") + e.what());
  }
  return r;
}

void apply(Session& s, const LogRecord& r) {
  if (r.rec != s.records + 1)
    throw StateError("log record " + std::to_string(r.rec) + " out of order (expected " + std::to_string(s.records + 1) + ")");
  using T = LogRecord::Type;
  if ((r.type == T::session_created) != (s.records == 0))
    throw StateError("a session log starts with exactly one session-created record");
  switch (r.type) {
    case T::session_created: {
      auto g = std::make_shared<const Graph>(parse_graph(r.graph_document));
      s.id = r.id;
      s.question = r.question;
      s.graph_document = r.graph_document;
      s.path_cover = r.path_cover;
      s.seed = r.seed;
      s.sequences = sequentialize(*g, r.path_cover);
      s.graph = std::move(g);
      s.status = SessionStatus::proposed;
      break;
    }
    case T::chain_proposed:
    case T::chain_edited:
      if (s.status != SessionStatus::proposed)
        throw StateError("the chain can only change while the session is proposed (status " + std::string(to_string(s.status)) + ")");
      validate_chain(r.chain);
      s.proposed = r.chain;
      s.proposed.partial = false;
      if (r.type == T::chain_edited) ++s.edits;
      break;
    case T::status_changed:
      if (!transition_allowed(s.status, r.status))
        throw StateError("cannot move from " + std::string(to_string(s.status)) + " to " + std::string(to_string(r.status)));
      s.status = r.status;
      if (!r.report.empty()) s.report = r.report;
      break;
    case T::step_event: {
      const bool confirm_prompt = r.event.kind == EventKind::needs_confirmation;
      if (confirm_prompt ? s.status != SessionStatus::proposed : s.status != SessionStatus::executing)
        throw StateError("step event not allowed while " + std::string(to_string(s.status)));
      if (r.event.seq <= s.last_seq()) throw StateError("event sequence numbers must increase");
      s.events.push_back(r.event);
      s.events.back().timestamp = r.timestamp;
      break;
    }
  }
  s.records = r.rec;
}

Session replay(const std::vector<LogRecord>& records) {
  Session s;
  for (const auto& r : records) apply(s, r);
  return s;
}

std::vector<LogRecord> parse_log(std::string_view text) {
  std::vector<LogRecord> out;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    try {
      out.push_back(LogRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(i + 1, std::string("malformed log line: ") + e.what());
    } catch (const ParseError& e) {
      throw ParseError(i + 1, e.what());
    }
  }
  return out;
}

json chain_view(const ApiChain& c) {
  json steps = json::array();
  for (const auto& call : c.steps) {
    json args = json::array();
    for (const auto& [name, value] : call.args) {
      if (const auto* ref = std::get_if<StepRef>(&value))
        args.push_back({{"name", name}, {"ref", ref->step}});
      else
        args.push_back({{"name", name}, {"value", std::get<std::string>(value)}});
    }
    steps.push_back({{"api", call.api}, {"args", args}});
  }
  return {{"steps", steps}, {"text", serialize_chain(c)}};
}

ApiChain chain_from_view(const json& j) {
  if (j.is_string()) return parse_chain(j.get<std::string>());
  try {
    if (j.contains("steps")) {
      ApiChain c;
      for (const auto& step : j.at("steps")) {
        ApiCall call{step.at("api").get<std::string>(), {}};
        if (step.contains("args")) {
          for (const auto& a : step.at("args")) {
            auto name = a.at("name").get<std::string>();
            if (a.contains("ref"))
              call.args.emplace_back(std::move(name), StepRef{a.at("ref").get<std::size_t>()});
            else
              call.args.emplace_back(std::move(name), a.at("value").get<std::string>());
          }
        }
        c.steps.push_back(std::move(call));
      }
      return c;
    }
    if (j.contains("text")) return parse_chain(j.at("text").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed chain: ") + e.what());
  }
  throw ValidationError("a chain needs 'steps' or 'text'");
}

json event_view(const StepEvent& e) {
  return {{"seq", e.seq}, {"step", e.step_index}, {"kind", to_string(e.kind)}, {"payload", e.payload}, {"ts", e.timestamp}};
}

json sequences_view(const SequenceBundle& b) {
  auto paths = [](const std::vector<Path>& ps) {
    json out = json::array();
    for (const auto& p : ps) out.push_back(p.nodes);
    return out;
  };
  return {{"base", b.base_sequences}, {"super", b.super_sequences}, {"base_paths", paths(b.base_paths)},
          {"super_paths", paths(b.super_paths)}};
}

json session_view(const Session& s) {
  json events = json::array();
  for (const auto& e : s.events) events.push_back(event_view(e));
  return {{"id", s.id},
          {"question", s.question},
          {"status", to_string(s.status)},
          {"chain", chain_view(s.proposed)},
          {"graph", {{"name", s.graph ? s.graph->name() : ""},
                     {"nodes", s.graph ? s.graph->node_count() : 0},
                     {"edges", s.graph ? s.graph->edge_count() : 0}}},
          {"seed", s.seed},
          {"edits", s.edits},
          {"last_seq", s.last_seq()},
          {"events", events},
          {"report", s.report}};
}

}  // namespace graphchain
