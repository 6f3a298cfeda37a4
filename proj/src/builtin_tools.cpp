#include "graphchain/builtin_tools.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"
#include "graphchain/graph_similarity.hpp"

namespace graphchain {

namespace {

using json = nlohmann::json;

const std::set<std::string>& chemical_symbols() {
  static const std::set<std::string> symbols{
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",  "Cl",
      "Ar", "K",  "Ca", "Ti", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
      "Rb", "Sr", "Ag", "Cd", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "Pt", "Au", "Hg", "Pb", "Bi"};
  return symbols;
}

ApiResult value_result(json v) { return ApiResult{ResultKind::value, std::move(v), nullptr, {}}; }

ApiResult graph_result(Graph g) {
  return ApiResult{ResultKind::graph, nullptr, std::make_shared<const Graph>(std::move(g)), {}};
}

class Invocation {
 public:
  Invocation(const ApiSpec& spec, const ApiCall& call, const ExecutionContext& ctx)
      : spec_(spec), call_(call), ctx_(ctx) {}

  const ApiResult& prior(std::size_t step) const {
    if (step >= ctx_.outputs.size())
      throw ExecutionError(spec_.id + ": reference $" + std::to_string(step) + " has no output yet");
    return ctx_.outputs[step];
  }

  // Explicit graph argument, else the latest graph output, else the user graph.
  const Graph& graph() const {
    if (const Binding* b = call_.arg("graph")) {
      if (const auto* ref = std::get_if<StepRef>(b)) {
        const auto& r = prior(ref->step);
        if (r.kind != ResultKind::graph)
          throw ExecutionError(spec_.id + ": argument 'graph' expects a graph but $" + std::to_string(ref->step) +
                               " is a " + (r.kind == ResultKind::value ? "value" : "report"));
        return *r.graph;
      }
      const auto& name = std::get<std::string>(*b);
      if (ctx_.store) {
        auto it = ctx_.store->find(name);
        if (it != ctx_.store->end()) return it->second;
      }
      throw ExecutionError(spec_.id + ": no graph named '" + name + "' in the store");
    }
    for (auto it = ctx_.outputs.rbegin(); it != ctx_.outputs.rend(); ++it)
      if (it->kind == ResultKind::graph) return *it->graph;
    if (!ctx_.user_graph) throw ExecutionError(spec_.id + ": no graph available");
    return *ctx_.user_graph;
  }

  std::optional<std::string> text(std::string_view name) const {
    const Binding* b = call_.arg(name);
    if (!b) return std::nullopt;
    if (const auto* ref = std::get_if<StepRef>(b)) {
      const auto& r = prior(ref->step);
      if (r.kind == ResultKind::value && r.value.is_string()) return r.value.get<std::string>();
      if (r.kind == ResultKind::value && r.value.is_number()) return r.value.dump();
      throw ExecutionError(spec_.id + ": argument '" + std::string(name) + "' expects a scalar value");
    }
    return std::get<std::string>(*b);
  }

  std::string required(std::string_view name) const {
    auto v = text(name);
    if (!v) throw ExecutionError(spec_.id + ": missing argument '" + std::string(name) + "'");
    return *v;
  }

  std::size_t count(std::string_view name, std::size_t fallback) const {
    auto v = text(name);
    if (!v) return fallback;
    auto n = detail::parse_u64(*v);
    if (!n || *n == 0) throw ExecutionError(spec_.id + ": argument '" + std::string(name) + "' must be a positive integer");
    return static_cast<std::size_t>(*n);
  }

  const ApiSpec& spec() const { return spec_; }
  const ExecutionContext& ctx() const { return ctx_; }

 private:
  const ApiSpec& spec_;
  const ApiCall& call_;
  const ExecutionContext& ctx_;
};

NodeId resolve_node(const Graph& g, const std::string& token, const std::string& api) {
  if (auto id = detail::parse_u64(token); id && g.contains(*id)) return *id;
  for (NodeId id : g.sorted_ids())
    if (g.label(id) == token) return id;
  throw ExecutionError(api + ": no node with id or label '" + token + "'");
}

std::vector<std::vector<NodeId>> components(const Graph& g) {
  std::vector<std::vector<NodeId>> out;
  std::set<NodeId> seen;
  for (NodeId s : g.sorted_ids()) {
    if (seen.contains(s)) continue;
    auto dist = hop_distances(g, s);
    std::vector<NodeId> members;
    for (const auto& [id, d] : dist) {
      seen.insert(id);
      members.push_back(id);
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

std::vector<std::pair<NodeId, NodeId>> parse_edge_list(const std::string& text, const std::string& api) {
  std::vector<std::pair<NodeId, NodeId>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto dash = item.find('-');
    auto a = dash == std::string::npos ? std::nullopt : detail::parse_u64(std::string_view(item).substr(0, dash));
    auto b = dash == std::string::npos ? std::nullopt : detail::parse_u64(std::string_view(item).substr(dash + 1));
    if (!a || !b) throw ExecutionError(api + ": edge '" + item + "' must look like <a>-<b>");
    out.emplace_back(*a, *b);
  }
  return out;
}

using Tool = std::function<ApiResult(const Invocation&)>;

const std::map<std::string, Tool>& tools() {
  static const std::map<std::string, Tool> table{
      {"load_graph",
       [](const Invocation& in) {
         if (auto name = in.text("name")) {
           if (in.ctx().store) {
             auto it = in.ctx().store->find(*name);
             if (it != in.ctx().store->end()) return graph_result(it->second);
           }
           throw ExecutionError(in.spec().id + ": no graph named '" + *name + "' in the store");
         }
         if (!in.ctx().user_graph) throw ExecutionError(in.spec().id + ": no graph was uploaded");
         return graph_result(*in.ctx().user_graph);
       }},
      {"node_count", [](const Invocation& in) { return value_result({{"nodes", in.graph().node_count()}}); }},
      {"edge_count", [](const Invocation& in) { return value_result({{"edges", in.graph().edge_count()}}); }},
      {"degree_stats",
       [](const Invocation& in) {
         const Graph& g = in.graph();
         std::size_t lo = 0, hi = 0, sum = 0;
         for (std::size_t i = 0; i < g.node_count(); ++i) {
           auto d = g.degree(g.nodes()[i].id);
           lo = i ? std::min(lo, d) : d;
           hi = std::max(hi, d);
           sum += d;
         }
         const double mean = g.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(g.node_count());
         return value_result({{"min", lo}, {"mean", mean}, {"max", hi}});
       }},
      {"connected_components",
       [](const Invocation& in) {
         auto comps = components(in.graph());
         return value_result({{"count", comps.size()}, {"components", comps}});
       }},
      {"shortest_path",
       [](const Invocation& in) {
         const Graph& g = in.graph();
         const auto from = in.required("from"), to = in.required("to");
         const NodeId s = resolve_node(g, from, in.spec().id), t = resolve_node(g, to, in.spec().id);
         auto dist = hop_distances(g, s);
         json hops = nullptr;
         if (auto it = dist.find(t); it != dist.end()) hops = it->second;
         return value_result({{"from", from}, {"to", to}, {"hops", hops}});
       }},
      {"classify_graph", [](const Invocation& in) { return value_result({{"type", classify_graph(in.graph())}}); }},
      {"similarity_search",
       [](const Invocation& in) {
         const Graph& q = in.graph();
         const std::size_t k = in.count("k", 3);
         if (!in.ctx().store || in.ctx().store->empty()) throw ExecutionError(in.spec().id + ": the graph store is empty");
         struct Hit {
           std::string name;
           GraphSimilarity sim;
         };
         std::vector<Hit> hits;
         for (const auto& [name, g] : *in.ctx().store) hits.push_back({name, graph_similarity(q, g)});
         std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.sim.similarity > b.sim.similarity; });
         json matches = json::array();
         for (std::size_t i = 0; i < std::min(k, hits.size()); ++i) {
           json m{{"name", hits[i].name}, {"similarity", hits[i].sim.similarity}};
           m["edit_distance"] = hits[i].sim.edit_distance ? json(*hits[i].sim.edit_distance) : json(nullptr);
           matches.push_back(std::move(m));
         }
         return value_result({{"matches", matches}});
       }},
      {"detect_suspect_edges",
       [](const Invocation& in) {
         // An edge is suspect when its endpoints stay within two hops without it,
         // i.e. they share a neighbour.
         const Graph& g = in.graph();
         json edges = json::array();
         std::vector<EdgeRecord> sorted(g.edges().begin(), g.edges().end());
         std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
         for (const auto& e : sorted) {
           auto na = g.neighbors(e.a), nb = g.neighbors(e.b);
           std::vector<NodeId> common;
           std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
           if (!common.empty()) edges.push_back({e.a, e.b});
         }
         return value_result({{"edges", edges}});
       }},
      {"edit_edges",
       [](const Invocation& in) {
         const Graph& g = in.graph();
         const auto& api = in.spec().id;
         std::vector<EdgeRecord> edges(g.edges().begin(), g.edges().end());
         for (auto [a, b] : parse_edge_list(in.text("remove").value_or(""), api)) {
           auto it = std::find_if(edges.begin(), edges.end(), [&](const EdgeRecord& e) {
             return e.a == std::min(a, b) && e.b == std::max(a, b);
           });
           if (it == edges.end()) throw ExecutionError(api + ": cannot remove missing edge " + std::to_string(a) + "-" + std::to_string(b));
           edges.erase(it);
         }
         for (auto [a, b] : parse_edge_list(in.text("add").value_or(""), api)) edges.push_back({std::min(a, b), std::max(a, b), {}});
         try {
           return graph_result(Graph(g.name(), std::vector<NodeRecord>(g.nodes().begin(), g.nodes().end()), std::move(edges)));
         } catch (const Error& e) {
           throw ExecutionError(api + ": " + e.what());
         }
       }},
      {"report",
       [](const Invocation& in) {
         std::string text;
         const auto& ctx = in.ctx();
         for (std::size_t i = 0; i < ctx.outputs.size(); ++i)
           text += "step " + std::to_string(i) + " " + ctx.step_apis[i] + ": " + ctx.outputs[i].render() + "\n";
         if (text.empty()) text = "no results\n";
         return ApiResult{ResultKind::report, nullptr, nullptr, std::move(text)};
       }},
  };
  return table;
}

bool kind_matches(OutputKind declared, ResultKind actual) {
  switch (declared) {
    case OutputKind::graph: return actual == ResultKind::graph;
    case OutputKind::value: return actual == ResultKind::value;
    case OutputKind::report: return actual == ResultKind::report;
  }
  return false;
}

}  // namespace

std::string ApiResult::render() const {
  switch (kind) {
    case ResultKind::value: return value.dump();
    case ResultKind::graph:
      return "graph " + graph->name() + " (" + std::to_string(graph->node_count()) + " nodes, " +
             std::to_string(graph->edge_count()) + " edges)";
    case ResultKind::report: return text;
  }
  return {};
}

GraphStore load_graph_store(const std::filesystem::path& dir) {
  GraphStore store;
  if (!std::filesystem::is_directory(dir)) throw NotFoundError("graph store directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".graph") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    Graph g = read_graph_file(f);
    std::string name = g.name();
    if (!store.emplace(name, std::move(g)).second) throw DuplicateError("graph store has two graphs named '" + name + "'");
  }
  return store;
}

ApiResult execute(const ApiRegistry& registry, const ApiCall& call, const ExecutionContext& ctx) {
  if (!registry.contains(call.api)) throw ExecutionError("unknown api '" + call.api + "'");
  const ApiSpec& spec = registry.get(call.api);
  const auto tool_name = spec.builtin_tool();
  if (tool_name.empty()) throw ExecutionError("api '" + spec.id + "' has no executable backend (" + spec.exec + ")");
  auto it = tools().find(tool_name);
  if (it == tools().end()) throw ExecutionError("api '" + spec.id + "' names unknown tool '" + tool_name + "'");
  for (const auto& [name, value] : call.args)
    if (const auto* ref = std::get_if<StepRef>(&value); ref && ref->step >= ctx.outputs.size())
      throw ExecutionError(spec.id + ": argument '" + name + "' references unavailable step $" + std::to_string(ref->step));
  if (spec.input == InputKind::value &&
      std::none_of(ctx.outputs.begin(), ctx.outputs.end(), [](const ApiResult& r) { return r.kind == ResultKind::value; }))
    throw ExecutionError(spec.id + ": needs a prior value but the chain has none");
  ApiResult r = it->second(Invocation(spec, call, ctx));
  if (!kind_matches(spec.output, r.kind))
    throw ExecutionError(spec.id + ": tool produced a result that does not match the declared output kind");
  return r;
}

std::vector<std::string> builtin_tool_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : tools()) names.push_back(k);
  return names;
}

std::string classify_graph(const Graph& g) {
  if (g.empty()) return "empty";
  const auto& symbols = chemical_symbols();
  const bool chemical = std::all_of(g.nodes().begin(), g.nodes().end(), [&](const NodeRecord& n) { return symbols.contains(n.label); });
  return chemical && g.max_degree() <= 4 ? "molecule" : "social";
}

}  // namespace graphchain
