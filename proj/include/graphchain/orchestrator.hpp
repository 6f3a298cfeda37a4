#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "graphchain/api_registry.hpp"
#include "graphchain/builtin_tools.hpp"
#include "graphchain/exemplar_store.hpp"
#include "graphchain/planner.hpp"
#include "graphchain/session.hpp"

namespace graphchain {

// Candidate depth covering the shipped registry, and a chain cap that keeps
// exhaustive scoring under the enumeration limit at that depth.
inline constexpr std::size_t kServiceCandidates = 16;
inline constexpr std::size_t kServiceMaxLen = 4;

struct OrchestratorConfig {
  planning::RolloutConfig rollout{.max_len = kServiceMaxLen, .candidates = kServiceCandidates, .exhaustive = true};
  std::size_t reference_count = 1;
  PathCoverConfig path_cover{2, true};
  std::filesystem::path log_dir;  // empty: keep logs in memory only
};

using IdGenerator = std::function<std::string()>;
using Clock = std::function<std::string()>;

// 128 random bits as 32 hex digits.
std::string random_session_id();
// UTC, ISO-8601 with milliseconds.
std::string utc_timestamp();

std::vector<std::string> suggest_questions(const Graph& g);

/// Session lifecycle: prompt intake, chain proposal, confirmation, execution.
/// Every state change is an appended log record; a session's state is the
/// fold of its log. Operations on one session are serialized; distinct
/// sessions proceed independently.
class Orchestrator {
 public:
  Orchestrator(const ApiRegistry& registry, const ExemplarStore& exemplars, const GraphStore& store,
               OrchestratorConfig config = {}, IdGenerator ids = random_session_id, Clock clock = utc_timestamp);
  ~Orchestrator();

  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  // Parses, sequentializes, plans and persists. Nothing is stored when the
  // graph does not parse or planning fails.
  Session submit_prompt(const std::string& question, const std::string& graph_document,
                        std::optional<std::uint64_t> seed = std::nullopt);

  // Plans again with another seed; only while proposed.
  Session regenerate(const std::string& id, std::uint64_t seed);

  Session confirm_chain(const std::string& id, const std::optional<ApiChain>& edited = std::nullopt);

  // Runs the confirmed chain on the calling thread, reporting each event.
  std::vector<StepEvent> execute_chain(const std::string& id,
                                       const std::function<void(const StepEvent&)>& on_event = {});

  // Moves the session to executing and runs the chain on a worker thread.
  Session start_execution(const std::string& id);

  Session get_session(const std::string& id) const;
  std::vector<Session> list_sessions() const;  // by id
  std::vector<StepEvent> events_since(const std::string& id, std::uint64_t since) const;

  // Blocks until an event with seq > since exists, the session is terminal,
  // or the timeout passes. Returns the session at that point.
  Session wait_for_events(const std::string& id, std::uint64_t since, std::chrono::milliseconds timeout) const;

  // Raw log of a session, one record per line.
  std::string session_log(const std::string& id) const;

  const ApiRegistry& registry() const noexcept { return registry_; }
  const OrchestratorConfig& config() const noexcept { return config_; }

 private:
  struct Slot {
    mutable std::mutex mu;
    mutable std::condition_variable changed;
    Session state;
    std::vector<LogRecord> log;
    std::filesystem::path file;
  };

  std::shared_ptr<Slot> slot(const std::string& id) const;
  void append(Slot& slot, LogRecord record);  // slot.mu held
  planning::PlanResult plan(const std::string& question, const Graph& graph, std::uint64_t seed) const;
  void validate_against_registry(const ApiChain& chain) const;
  std::vector<StepEvent> run_steps(Slot& slot, const std::function<void(const StepEvent&)>& on_event);
  void begin(Slot& slot);  // slot.mu held
  void load_logs();

  const ApiRegistry& registry_;
  const ExemplarStore& exemplars_;
  const GraphStore& store_;
  OrchestratorConfig config_;
  IdGenerator ids_;
  Clock clock_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;

  std::mutex workers_mu_;
  std::vector<std::jthread> workers_;
};

}  // namespace graphchain
