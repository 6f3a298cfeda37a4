#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "graphchain/chain.hpp"
#include "graphchain/graph.hpp"
#include "graphchain/sequentializer.hpp"

namespace graphchain {

enum class SessionStatus { proposed, confirmed, executing, done, failed };
enum class EventKind { started, finished, error, needs_confirmation };

std::string_view to_string(SessionStatus s);
std::string_view to_string(EventKind k);
SessionStatus parse_status(std::string_view s);
EventKind parse_event_kind(std::string_view s);

// proposed -> confirmed -> executing -> done | failed
bool transition_allowed(SessionStatus from, SessionStatus to);

struct StepEvent {
  std::uint64_t seq = 0;  // strictly increasing within a session, from 1
  std::size_t step_index = 0;
  EventKind kind = EventKind::started;
  std::string payload;
  std::string timestamp;

  friend bool operator==(const StepEvent&, const StepEvent&) = default;
};

struct Session {
  std::string id;
  std::string question;
  std::shared_ptr<const Graph> graph;
  std::string graph_document;  // canonical serialization of graph
  PathCoverConfig path_cover;
  std::uint64_t seed = 0;
  SequenceBundle sequences;
  ApiChain proposed;
  SessionStatus status = SessionStatus::proposed;
  std::vector<StepEvent> events;
  std::string report;  // final report once done, error text once failed
  std::size_t edits = 0;
  std::uint64_t records = 0;  // log records folded so far

  std::uint64_t last_seq() const { return events.empty() ? 0 : events.back().seq; }
  friend bool operator==(const Session& a, const Session& b);
};

// One line of a session log. The log is the source of truth; a session's
// state is the fold of its records in order.
struct LogRecord {
  enum class Type { session_created, chain_proposed, chain_edited, status_changed, step_event };

  Type type = Type::session_created;
  std::uint64_t rec = 0;  // 1-based position in the log
  std::string timestamp;
  // session_created
  std::string id, question, graph_document;
  PathCoverConfig path_cover;
  std::uint64_t seed = 0;
  // chain_proposed, chain_edited
  ApiChain chain;
  // status_changed
  SessionStatus status = SessionStatus::proposed;
  std::string report;
  // step_event
  StepEvent event;

  nlohmann::json to_json() const;
  static LogRecord from_json(const nlohmann::json& j);
  std::string to_line() const { return to_json().dump(); }
};

std::string_view to_string(LogRecord::Type t);

// Validates the record against the current state and applies it. Throws
// StateError for an illegal transition or out-of-order record.
void apply(Session& session, const LogRecord& record);

Session replay(const std::vector<LogRecord>& records);
std::vector<LogRecord> parse_log(std::string_view text);

nlohmann::json session_view(const Session& s);
nlohmann::json event_view(const StepEvent& e);
nlohmann::json sequences_view(const SequenceBundle& b);
nlohmann::json chain_view(const ApiChain& c);
ApiChain chain_from_view(const nlohmann::json& j);

}  // namespace graphchain
