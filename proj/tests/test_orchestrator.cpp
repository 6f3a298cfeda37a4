#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "graphchain/errors.hpp"
#include "graphchain/orchestrator.hpp"

using namespace graphchain;

namespace {

const std::string kPath = "graph p\nnode 0 a\nnode 1 b\nnode 2 c\nnode 3 d\nedge 0 1\nedge 1 2\nedge 2 3\n";
const std::string kMolecule = "graph m\nnode 0 C\nnode 1 C\nnode 2 O\nedge 0 1\nedge 1 2\n";

struct Fixture {
  ApiRegistry registry;
  ExemplarStore exemplars;
  GraphStore store = load_graph_store(GRAPHCHAIN_DATA_DIR "/store");

  Fixture() {
    load_registry(registry, GRAPHCHAIN_DATA_DIR "/registry.txt");
    load_exemplars(exemplars, GRAPHCHAIN_DATA_DIR "/exemplars.tsv");
  }

  std::unique_ptr<Orchestrator> make(std::filesystem::path log_dir = {}) {
    OrchestratorConfig cfg;
    cfg.rollout.seed = 7;
    cfg.log_dir = std::move(log_dir);
    auto counter = std::make_shared<std::atomic<int>>(0);
    return std::make_unique<Orchestrator>(
        registry, exemplars, store, cfg, [counter] { return "s" + std::to_string(++*counter); },
        [] { return std::string("T"); });
  }
};

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("graphchain_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<std::string> kinds(const std::vector<StepEvent>& events) {
  std::vector<std::string> out;
  for (const auto& e : events) out.push_back(std::string(to_string(e.kind)) + std::to_string(e.step_index));
  return out;
}

}  // namespace

TEST_CASE("session ids and timestamps") {
  const auto id = random_session_id();
  CHECK(id.size() == 32);
  CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(random_session_id() != id);
  const auto ts = utc_timestamp();
  CHECK(ts.size() == 24);
  CHECK(ts.back() == 'Z');
}

TEST_CASE("suggested questions follow the graph type") {
  auto has = [](const std::vector<std::string>& qs, const std::string& word) {
    return std::any_of(qs.begin(), qs.end(), [&](const std::string& q) { return q.find(word) != std::string::npos; });
  };
  CHECK(has(suggest_questions(parse_graph(kMolecule)), "similar"));
  CHECK(has(suggest_questions(parse_graph(kPath)), "communit"));
  const auto generic = suggest_questions(parse_graph("graph e\n"));
  CHECK(generic.size() == 2);
  CHECK(suggest_questions(parse_graph(kMolecule)) == suggest_questions(parse_graph(kMolecule)));
}

TEST_CASE("submit proposes a chain") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("how many connected components does this network have", kPath);
  CHECK(s.id == "s1");
  CHECK(s.status == SessionStatus::proposed);
  const auto ids = s.proposed.api_ids();
  CHECK(std::find(ids.begin(), ids.end(), "connected_components") != ids.end());
  CHECK_FALSE(s.sequences.base_sequences.empty());
  REQUIRE(s.events.size() == 1);
  CHECK(s.events[0].kind == EventKind::needs_confirmation);
  CHECK(s.events[0].payload == format_inline_chain(s.proposed));

  CHECK_NOTHROW(orch->submit_prompt("", kPath));
  CHECK_THROWS_AS(orch->submit_prompt("count", "graph g\nedge 0 1\n"), ParseError);
  CHECK(orch->list_sessions().size() == 2);
  CHECK_THROWS_AS(orch->get_session("nope"), NotFoundError);
  CHECK(orch->get_session("s1") == s);
}

TEST_CASE("confirmation with and without edits") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("how many nodes and edges", kPath);
  const auto before = s.proposed;

  ApiChain unknown = before;
  unknown.steps[0].api = "no_such_api";
  CHECK_THROWS_AS(orch->confirm_chain(s.id, unknown), ValidationError);
  ApiChain forward = parse_chain("node_count\nedge_count\n");
  forward.steps[0].args.emplace_back("graph", StepRef{1});
  CHECK_THROWS_AS(orch->confirm_chain(s.id, forward), ValidationError);
  CHECK(orch->get_session(s.id).status == SessionStatus::proposed);

  const ApiChain edited = parse_chain("node_count\ndegree_stats\nreport\n");
  const auto c = orch->confirm_chain(s.id, edited);
  CHECK(c.status == SessionStatus::confirmed);
  CHECK(c.proposed == edited);
  CHECK(c.edits == 1);
  CHECK_THROWS_AS(orch->confirm_chain(s.id), StateError);

  const auto s2 = orch->submit_prompt("how many nodes and edges", kPath);
  const auto c2 = orch->confirm_chain(s2.id);
  CHECK(c2.proposed == s2.proposed);
  CHECK(c2.edits == 0);
}

TEST_CASE("execution emits started and finished per step") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("size", kPath);
  CHECK_THROWS_AS(orch->execute_chain(s.id), StateError);  // not confirmed
  orch->confirm_chain(s.id, parse_chain("node_count\nedge_count\nreport\n"));
  std::vector<StepEvent> streamed;
  const auto events = orch->execute_chain(s.id, [&](const StepEvent& e) { streamed.push_back(e); });
  CHECK(kinds(events) == std::vector<std::string>{"started0", "finished0", "started1", "finished1", "started2", "finished2"});
  CHECK(streamed == events);
  const auto done = orch->get_session(s.id);
  CHECK(done.status == SessionStatus::done);
  CHECK(done.report == "step 0 node_count: {\"nodes\":4}\nstep 1 edge_count: {\"edges\":3}\n");
  for (std::size_t i = 1; i < done.events.size(); ++i) CHECK(done.events[i].seq == done.events[i - 1].seq + 1);
  CHECK_THROWS_AS(orch->execute_chain(s.id), StateError);
}

TEST_CASE("a failing step stops the chain") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("size", kPath);
  orch->confirm_chain(s.id, parse_chain("node_count\nshortest_path from=a to=zz\nedge_count\n"));
  const auto events = orch->execute_chain(s.id);
  CHECK(kinds(events) == std::vector<std::string>{"started0", "finished0", "started1", "error1"});
  const auto failed = orch->get_session(s.id);
  CHECK(failed.status == SessionStatus::failed);
  CHECK(failed.report.find("zz") != std::string::npos);
}

TEST_CASE("a chain without a report step gets an assembled one") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("size", kMolecule);
  orch->confirm_chain(s.id, parse_chain("classify_graph\n"));
  orch->execute_chain(s.id);
  CHECK(orch->get_session(s.id).report == "step 0 classify_graph: {\"type\":\"molecule\"}\n");
}

TEST_CASE("the log replays to the same session") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("which bonds look suspicious", kMolecule);
  orch->confirm_chain(s.id, parse_chain("detect_suspect_edges\nedit_edges remove=0-1\nconnected_components\nreport\n"));
  orch->execute_chain(s.id);
  const auto log = orch->session_log(s.id);
  const auto replayed = replay(parse_log(log));
  CHECK(replayed == orch->get_session(s.id));
  CHECK(replayed.status == SessionStatus::done);

  // Records out of order or with illegal transitions are rejected.
  auto records = parse_log(log);
  std::swap(records[1], records[2]);
  CHECK_THROWS_AS(replay(records), StateError);
  records = parse_log(log);
  records.erase(records.begin() + 3);  // drop the confirmation
  CHECK_THROWS_AS(replay(records), StateError);
  CHECK_THROWS_AS(parse_log("{\"rec\":1}\nnot json\n"), ParseError);
}

TEST_CASE("identical inputs give identical logs") {
  Fixture f;
  auto a = f.make(), b = f.make();
  for (auto* o : {a.get(), b.get()}) {
    const auto s = o->submit_prompt("what molecules are similar to this graph", kMolecule);
    o->confirm_chain(s.id);
    o->execute_chain(s.id);
  }
  CHECK(a->session_log("s1") == b->session_log("s1"));
}

TEST_CASE("sessions persist across restarts") {
  Fixture f;
  const auto dir = fresh_dir("persist");
  Session before;
  {
    auto orch = f.make(dir);
    const auto s = orch->submit_prompt("how many nodes", kPath);
    orch->confirm_chain(s.id);
    orch->execute_chain(s.id);
    orch->submit_prompt("second", kMolecule);
    before = orch->get_session(s.id);
  }
  CHECK(std::filesystem::exists(dir / "s1.log"));
  auto again = f.make(dir);
  CHECK(again->list_sessions().size() == 2);
  CHECK(again->get_session("s1") == before);
  const auto s3 = again->submit_prompt("third", kPath);
  CHECK(s3.id == "s3");  // "s1" and "s2" are taken
  std::filesystem::remove_all(dir);
}

TEST_CASE("asynchronous execution and waiting") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("how many nodes", kPath);
  orch->confirm_chain(s.id, parse_chain("node_count\nedge_count\ndegree_stats\nreport\n"));
  const auto started = orch->start_execution(s.id);
  CHECK(started.status == SessionStatus::executing);
  CHECK_THROWS_AS(orch->start_execution(s.id), StateError);
  std::uint64_t cursor = started.last_seq();
  std::vector<StepEvent> seen;
  for (int i = 0; i < 100; ++i) {
    const auto now = orch->wait_for_events(s.id, cursor, std::chrono::milliseconds(200));
    for (const auto& e : orch->events_since(s.id, cursor)) seen.push_back(e);
    cursor = now.last_seq();
    if (now.status == SessionStatus::done) break;
  }
  CHECK(seen.size() == 8);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i].seq == seen[i - 1].seq + 1);
  CHECK(orch->get_session(s.id).status == SessionStatus::done);
}

TEST_CASE("regenerate only while proposed") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("what molecules are similar to this graph", kMolecule);
  const auto r = orch->regenerate(s.id, 99);
  CHECK(r.status == SessionStatus::proposed);
  CHECK(r.events.size() == 2);
  orch->confirm_chain(s.id);
  CHECK_THROWS_AS(orch->regenerate(s.id, 1), StateError);
}

TEST_CASE("concurrent sessions") {
  Fixture f;
  auto orch = f.make();
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      try {
        for (int i = 0; i < 3; ++i) {
          const auto s = orch->submit_prompt("how many nodes", kPath);
          orch->confirm_chain(s.id, parse_chain("node_count\nreport\n"));
          orch->execute_chain(s.id);
        }
      } catch (...) {
        ++failures;
      }
    });
  for (auto& t : threads) t.join();
  CHECK(failures == 0);
  const auto all = orch->list_sessions();
  CHECK(all.size() == 12);
  for (const auto& s : all) CHECK(s.status == SessionStatus::done);
}

TEST_CASE("service defaults reproduce the nearest exemplar chain") {
  Fixture f;
  auto orch = f.make();
  const auto s = orch->submit_prompt("how many nodes and edges does this graph have", kPath);
  CHECK(s.proposed.api_ids() == std::vector<std::string>{"node_count", "edge_count", "report"});
  const auto m = orch->submit_prompt("which bonds in this molecule look suspicious", kMolecule);
  CHECK(m.proposed.api_ids() == std::vector<std::string>{"detect_suspect_edges", "report"});
}
