// graphchain command line: offline tools plus the session service and client.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "graphchain/api_registry.hpp"
#include "graphchain/builtin_tools.hpp"
#include "graphchain/chain.hpp"
#include "graphchain/chain_metric.hpp"
#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"
#include "graphchain/exemplar_store.hpp"
#include "graphchain/http_service.hpp"
#include "graphchain/orchestrator.hpp"
#include "graphchain/planner.hpp"
#include "graphchain/sequentializer.hpp"
#include "graphchain/vector_index.hpp"

// after the Eigen headers: <resolv.h> defines _res
#include <CLI11.hpp>
#include <httplib.h>

using namespace graphchain;
using nlohmann::json;

namespace {

std::string data_path(const char* name) {
  const char* dir = std::getenv("GRAPHCHAIN_DATA_DIR");
  return std::string(dir && *dir ? dir : GRAPHCHAIN_DATA_DIR) + "/" + name;
}

std::uint64_t env_seed() {
  const char* s = std::getenv("GRAPHCHAIN_SEED");
  if (!s || !*s) return 0;
  auto v = detail::parse_u64(s);
  if (!v) throw ValidationError("GRAPHCHAIN_SEED must be a non-negative integer");
  return *v;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::string path_text(const Path& p) {
  std::vector<std::string> ids;
  for (auto n : p.nodes) ids.push_back(std::to_string(n));
  return join(ids, "-");
}

ApiChain read_chain_arg(const std::string& arg) {
  std::ifstream probe(arg);
  if (probe) return parse_chain(detail::read_file(arg));
  return parse_inline_chain(arg);
}

ann::VectorSet<double> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return ann::read_vectors<double>(in);
}

ann::TauMgIndex<double> read_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return ann::TauMgIndex<double>::load(in);
}

Eigen::VectorXd parse_query(const std::string& text) {
  const auto tok = detail::split_ws(text);
  Eigen::VectorXd q(static_cast<Eigen::Index>(tok.size()));
  for (std::size_t i = 0; i < tok.size(); ++i) {
    auto v = detail::parse_double(tok[i]);
    if (!v) throw ParseError(0, "query component '" + std::string(tok[i]) + "' is not a number");
    q[static_cast<Eigen::Index>(i)] = *v;
  }
  return q;
}

struct Client {
  std::string url;

  json call(const std::string& method, const std::string& path, const json& body = nullptr) const {
    httplib::Client cli(url);
    cli.set_read_timeout(120, 0);
    httplib::Result res = method == "GET" ? cli.Get(path)
                                          : cli.Post(path, body.is_null() ? std::string("{}") : body.dump(),
                                                     "application/json");
    if (!res) throw Error("cannot reach " + url + path + ": " + httplib::to_string(res.error()));
    json j = json::parse(res->body, nullptr, false);
    if (res->status >= 400) {
      std::string msg = j.is_object() && j.contains("error") ? j["error"].get<std::string>() : res->body;
      throw Error("server returned " + std::to_string(res->status) + ": " + msg);
    }
    return j;
  }
};

void print_events(const json& events) {
  for (const auto& e : events)
    std::cout << e.at("seq") << ' ' << e.at("kind").get<std::string>() << " step " << e.at("step") << ": "
              << e.at("payload").get<std::string>() << '\n';
}

std::atomic<HttpService*> g_service{nullptr};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph analysis chain planner and session service"};
  app.require_subcommand(1);

  // seq
  auto* seq = app.add_subcommand("seq", "print the path cover and motif sequences of a graph");
  std::string seq_graph;
  std::size_t seq_len = 2;
  bool seq_minimize = false, seq_super = false;
  seq->add_option("--graph", seq_graph, "graph file")->required();
  seq->add_option("--l", seq_len, "maximum path length in edges");
  seq->add_flag("--minimize", seq_minimize, "drop paths contained in longer ones");
  seq->add_flag("--super", seq_super, "also print motif-level sequences");

  // loss
  auto* loss_cmd = app.add_subcommand("loss", "chain distance under the optimal matching");
  std::string loss_chain, loss_ref;
  double loss_alpha = 1.0;
  loss_cmd->add_option("--chain", loss_chain, "chain file or inline 'a;b;c'")->required();
  loss_cmd->add_option("--ref", loss_ref, "reference chain file or inline")->required();
  loss_cmd->add_option("--alpha", loss_alpha, "regularizer weight");

  // plan
  auto* plan = app.add_subcommand("plan", "generate an api chain for a question");
  std::string plan_question, plan_graph, plan_registry = data_path("registry.txt"),
                                         plan_exemplars = data_path("exemplars.tsv");
  planning::RolloutConfig plan_cfg = OrchestratorConfig{}.rollout;
  std::optional<std::uint64_t> plan_seed;
  std::size_t plan_refs = OrchestratorConfig{}.reference_count;
  plan->add_option("--question", plan_question)->required();
  plan->add_option("--graph", plan_graph, "graph file")->required();
  plan->add_option("--r", plan_cfg.rollouts, "rollouts per candidate");
  plan->add_option("--max-len", plan_cfg.max_len);
  plan->add_option("--k", plan_cfg.candidates, "retrieval depth for candidates");
  plan->add_option("--alpha", plan_cfg.alpha);
  plan->add_option("--seed", plan_seed);
  plan->add_option("--references", plan_refs, "number of exemplar chains to compare against");
  plan->add_flag("--exhaustive,!--sampled", plan_cfg.exhaustive,
                 "enumerate completions when the space is small (default), or always use random rollouts");
  plan->add_option("--registry", plan_registry);
  plan->add_option("--exemplars", plan_exemplars);

  // index
  auto* index = app.add_subcommand("index", "build, query and audit a proximity-graph index");
  index->require_subcommand(1);
  auto* ib = index->add_subcommand("build", "build an index over a vector file");
  std::string ib_vectors, ib_out;
  std::optional<double> ib_tau;
  std::size_t ib_degree = 32;
  ib->add_option("--vectors", ib_vectors, "'<n> <d>' header then one vector per line")->required();
  ib->add_option("--out", ib_out)->required();
  ib->add_option("--tau", ib_tau, "occlusion margin; default 0.05 x mean pairwise distance");
  ib->add_option("--max-degree", ib_degree);
  auto* iq = index->add_subcommand("query", "nearest neighbours of a query vector");
  std::string iq_index, iq_vectors, iq_query;
  std::size_t iq_k = 1, iq_beam = 32;
  bool iq_route = false;
  iq->add_option("--index", iq_index)->required();
  iq->add_option("--vectors", iq_vectors)->required();
  iq->add_option("--query", iq_query, "space-separated components")->required();
  iq->add_option("--k", iq_k);
  iq->add_option("--beam", iq_beam);
  iq->add_flag("--route", iq_route, "print the expansion order");
  auto* ia = index->add_subcommand("audit", "check every retained edge against the occlusion rule");
  std::string ia_index, ia_vectors;
  ia->add_option("--index", ia_index)->required();
  ia->add_option("--vectors", ia_vectors)->required();

  // apis
  auto* apis = app.add_subcommand("apis", "inspect and extend the api registry");
  apis->require_subcommand(1);
  std::string apis_registry = data_path("registry.txt");
  apis->add_option("--registry", apis_registry);
  auto* al = apis->add_subcommand("list");
  auto* aa = apis->add_subcommand("add", "append an api record to the registry file");
  ApiSpec new_api;
  std::string aa_in = "graph", aa_out = "value";
  aa->add_option("--id", new_api.id)->required();
  aa->add_option("--description", new_api.description)->required();
  aa->add_option("--in", aa_in);
  aa->add_option("--out", aa_out);
  aa->add_option("--exec", new_api.exec)->required();
  auto* ar = apis->add_subcommand("retrieve", "rank apis against a question");
  std::string ar_question;
  std::size_t ar_k = 5;
  ar->add_option("--question", ar_question)->required();
  ar->add_option("--k", ar_k);

  // serve
  auto* serve = app.add_subcommand("serve", "run the session service");
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1", serve_registry = data_path("registry.txt"),
              serve_store = data_path("store"), serve_logs = "sessions", serve_exemplars = data_path("exemplars.tsv");
  serve->add_option("--port", serve_port);
  serve->add_option("--host", serve_host);
  serve->add_option("--registry", serve_registry);
  serve->add_option("--store", serve_store, "directory of *.graph files");
  serve->add_option("--log-dir", serve_logs);
  serve->add_option("--exemplars", serve_exemplars);

  // session client
  auto* session = app.add_subcommand("session", "talk to a running service");
  session->require_subcommand(1);
  std::string url = "http://127.0.0.1:8080";
  session->add_option("--url", url);
  auto* ss = session->add_subcommand("submit");
  std::string ss_question, ss_graph;
  std::optional<std::uint64_t> ss_seed;
  ss->add_option("--question", ss_question)->required();
  ss->add_option("--graph", ss_graph, "graph file")->required();
  ss->add_option("--seed", ss_seed);
  auto* sc = session->add_subcommand("confirm");
  std::string sc_id, sc_chain;
  sc->add_option("id", sc_id)->required();
  sc->add_option("--chain", sc_chain, "edited chain, file or inline");
  auto* sx = session->add_subcommand("execute");
  std::string sx_id;
  sx->add_option("id", sx_id)->required();
  auto* st = session->add_subcommand("tail", "follow a session's events until it finishes");
  std::string st_id;
  std::uint64_t st_since = 0;
  st->add_option("id", st_id)->required();
  st->add_option("--since", st_since);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seq) {
      const Graph g = read_graph_file(seq_graph);
      const auto b = sequentialize(g, PathCoverConfig{seq_len, seq_minimize});
      for (std::size_t i = 0; i < b.base_sequences.size(); ++i)
        std::cout << "base: " << path_text(b.base_paths[i]) << "  " << join(b.base_sequences[i], " ") << '\n';
      if (seq_super)
        for (std::size_t i = 0; i < b.super_sequences.size(); ++i)
          std::cout << "super: " << path_text(b.super_paths[i]) << "  " << join(b.super_sequences[i], " ") << '\n';
    } else if (*loss_cmd) {
      const ApiChain c = read_chain_arg(loss_chain), r = read_chain_arg(loss_ref);
      const auto m = metric::optimal_matching(c, r, loss_alpha);
      std::cout << "X " << m.loss.edit << "\nY " << m.loss.regularizer << "\nalpha " << m.loss.alpha << "\ntotal "
                << m.loss.total << "\nmatching";
      for (Eigen::Index i = 0; i < m.matching.rows(); ++i)
        for (Eigen::Index j = 0; j < m.matching.cols(); ++j)
          if (m.matching(i, j)) std::cout << ' ' << i << "->" << j;
      std::cout << '\n';
    } else if (*plan) {
      auto embedder = embedder_from_env();
      ApiRegistry registry(embedder);
      load_registry(registry, plan_registry);
      ExemplarStore exemplars(embedder);
      load_exemplars(exemplars, plan_exemplars);
      const Graph g = read_graph_file(plan_graph);
      plan_cfg.seed = plan_seed.value_or(env_seed());
      const Embedding q = registry.embed(plan_question);
      const auto refs = reference_chains(q, exemplars, plan_refs);
      for (const auto& r : refs.chains) std::cout << "reference " << format_inline_chain(r) << '\n';
      const auto result = planning::generate_chain(q, g, registry, refs, plan_cfg);
      for (std::size_t i = 0; i < result.trace.size(); ++i) {
        std::cout << "step " << i;
        for (const auto& s : result.trace[i].scores) std::cout << ' ' << s.api << '=' << s.score;
        std::cout << " -> " << result.trace[i].chosen << '\n';
      }
      std::cout << serialize_chain(result.chain);
    } else if (*ib) {
      const auto set = read_vector_file(ib_vectors);
      const double tau = ib_tau.value_or(ann::default_tau(set));
      const auto idx = ann::TauMgIndex<double>::build(set, tau, ib_degree);
      std::ofstream out(ib_out);
      if (!out) throw Error("cannot write " + ib_out);
      idx.save(out, {{"max_degree", std::to_string(ib_degree)}});
      std::cout << "nodes " << idx.size() << " tau " << tau << " rule_edges " << idx.rule_edge_count()
                << " repair_edges " << idx.repair_edge_count() << " entry " << idx.entry_point() << '\n';
    } else if (*iq) {
      const auto set = read_vector_file(iq_vectors);
      const auto idx = read_index_file(iq_index);
      ann::SearchStats stats;
      const auto hits = idx.search(set, parse_query(iq_query), iq_beam, iq_k, &stats);
      for (const auto& h : hits) std::cout << h.id << ' ' << std::setprecision(10) << h.distance << '\n';
      std::cout << "hops " << stats.hops << " distance_evaluations " << stats.distance_evaluations << '\n';
      if (iq_route) {
        std::cout << "route";
        for (auto u : stats.route) std::cout << ' ' << u;
        std::cout << '\n';
      }
    } else if (*ia) {
      const auto set = read_vector_file(ia_vectors);
      const auto idx = read_index_file(ia_index);
      const auto bad = idx.audit(set);
      for (const auto& v : bad) std::cout << "violation " << v.u << ' ' << v.v << " occluded by " << v.witness << '\n';
      std::cout << (bad.empty() ? "ok" : "FAILED") << ": " << idx.rule_edge_count() << " rule edges checked\n";
      return bad.empty() ? 0 : 1;
    } else if (*apis) {
      ApiRegistry registry(embedder_from_env());
      if (*aa) {
        new_api.input = parse_input_kind(aa_in);
        new_api.output = parse_output_kind(aa_out);
        load_registry(registry, apis_registry);
        registry.add(new_api);  // validates before touching the file
        std::ofstream out(apis_registry, std::ios::app);
        out << '\n' << serialize_registry({new_api});
        std::cout << "added " << new_api.id << '\n';
        return 0;
      }
      load_registry(registry, apis_registry);
      if (*al) {
        for (const auto* a : registry.specs())
          std::cout << a->id << '\t' << to_string(a->input) << " -> " << to_string(a->output) << '\t'
                    << a->description << '\n';
      } else if (*ar) {
        for (const auto& hit : registry.retrieve(ar_question, ar_k))
          std::cout << hit.spec->id << '\t' << std::fixed << std::setprecision(4) << hit.score << '\n';
      }
    } else if (*serve) {
      auto embedder = embedder_from_env();
      ApiRegistry registry(embedder);
      load_registry(registry, serve_registry);
      ExemplarStore exemplars(embedder);
      load_exemplars(exemplars, serve_exemplars);
      const GraphStore store = load_graph_store(serve_store);
      OrchestratorConfig cfg;
      cfg.rollout.seed = env_seed();
      cfg.log_dir = serve_logs;
      Orchestrator orch(registry, exemplars, store, cfg);
      HttpService service(orch);
      const int port = service.bind(serve_host, serve_port);
      g_service = &service;
      std::signal(SIGINT, [](int) {
        if (auto* s = g_service.load()) s->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (auto* s = g_service.load()) s->stop();
      });
      std::cout << "listening on http://" << serve_host << ':' << port << std::endl;
      service.serve();
      g_service = nullptr;
    } else if (*session) {
      const Client client{url};
      if (*ss) {
        json body{{"question", ss_question}, {"graph_document", detail::read_file(ss_graph)}};
        if (ss_seed) body["seed"] = *ss_seed;
        const auto s = client.call("POST", "/sessions", body);
        std::cout << "session " << s.at("id").get<std::string>() << " (" << s.at("status").get<std::string>()
                  << ")\n"
                  << s.at("chain").at("text").get<std::string>();
      } else if (*sc) {
        json body = json::object();
        if (!sc_chain.empty()) body["chain"] = chain_view(read_chain_arg(sc_chain));
        const auto s = client.call("POST", "/sessions/" + sc_id + "/confirm", body);
        std::cout << "session " << sc_id << " " << s.at("status").get<std::string>() << '\n'
                  << s.at("chain").at("text").get<std::string>();
      } else if (*sx) {
        const auto s = client.call("POST", "/sessions/" + sx_id + "/execute");
        std::cout << "session " << sx_id << " " << s.at("status").get<std::string>() << '\n';
      } else if (*st) {
        std::uint64_t cursor = st_since;
        for (;;) {
          const auto r = client.call("GET", "/sessions/" + st_id + "/events?since=" + std::to_string(cursor) + "&wait=5000");
          print_events(r.at("events"));
          cursor = r.at("last_seq").get<std::uint64_t>();
          const auto status = r.at("status").get<std::string>();
          if (status == "done" || status == "failed") {
            std::cout << status << '\n' << r.at("report").get<std::string>();
            return status == "done" ? 0 : 1;
          }
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
