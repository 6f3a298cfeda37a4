#include "graphchain/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"

namespace graphchain {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

namespace {

void check_token(const std::string& s, const char* what) {
  if (s.empty() || detail::has_space(s))
    throw ValidationError(std::string(what) + " must be a non-empty token without whitespace: '" + s + "'");
}

std::pair<NodeId, NodeId> key(NodeId a, NodeId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

Graph::Graph(std::string name, std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges)
    : name_(std::move(name)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  check_token(name_, "graph name");
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    check_token(nodes_[i].label, "node label");
    if (!index_.emplace(nodes_[i].id, i).second)
      throw DuplicateError("duplicate node id " + std::to_string(nodes_[i].id));
  }
  adjacency_.resize(nodes_.size());
  for (auto& e : edges_) {
    if (e.a == e.b) throw ValidationError("self-loop on node " + std::to_string(e.a));
    if (!contains(e.a) || !contains(e.b))
      throw ReferenceError(0, "edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                                  " references an undeclared node");
    if (!e.label.empty()) check_token(e.label, "edge label");
    if (e.a > e.b) std::swap(e.a, e.b);
    if (!edge_keys_.insert({e.a, e.b}).second)
      throw DuplicateError("duplicate edge " + std::to_string(e.a) + "-" + std::to_string(e.b));
    adjacency_[index_.at(e.a)].push_back(e.b);
    adjacency_[index_.at(e.b)].push_back(e.a);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

std::size_t Graph::position(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("unknown node id " + std::to_string(id));
  return it->second;
}

const std::string& Graph::label(NodeId id) const { return nodes_[position(id)].label; }

std::span<const NodeId> Graph::neighbors(NodeId id) const { return adjacency_[position(id)]; }

std::size_t Graph::max_degree() const noexcept {
  std::size_t best = 0;
  for (const auto& adj : adjacency_) best = std::max(best, adj.size());
  return best;
}

bool Graph::has_edge(NodeId a, NodeId b) const { return edge_keys_.contains(key(a, b)); }

std::vector<NodeId> Graph::sorted_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes_.size());
  for (const auto& n : nodes_) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool operator==(const Graph& lhs, const Graph& rhs) {
  if (lhs.name_ != rhs.name_ || lhs.nodes_.size() != rhs.nodes_.size() ||
      lhs.edges_.size() != rhs.edges_.size())
    return false;
  auto by_id = [](const NodeRecord& x, const NodeRecord& y) { return x.id < y.id; };
  auto by_pair = [](const EdgeRecord& x, const EdgeRecord& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); };
  auto ln = lhs.nodes_, rn = rhs.nodes_;
  std::sort(ln.begin(), ln.end(), by_id);
  std::sort(rn.begin(), rn.end(), by_id);
  auto le = lhs.edges_, re = rhs.edges_;
  std::sort(le.begin(), le.end(), by_pair);
  std::sort(re.begin(), re.end(), by_pair);
  return ln == rn && le == re;
}

Graph parse_graph(std::string_view text) {
  std::optional<std::string> name;
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  std::unordered_map<NodeId, std::size_t> declared;  // id -> line
  std::vector<std::size_t> edge_lines;

  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    auto line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto tok = detail::split_ws(line);
    const auto kind = tok[0];
    if (!name) {
      if (kind != "graph" || tok.size() != 2) throw ParseError(lineno, "expected 'graph <name>' header");
      name = std::string(tok[1]);
      continue;
    }
    if (kind == "node") {
      if (tok.size() < 2 || tok.size() > 3) throw ParseError(lineno, "expected 'node <id> [<label>]'");
      auto id = detail::parse_u64(tok[1]);
      if (!id) throw ParseError(lineno, "invalid node id '" + std::string(tok[1]) + "'");
      if (!declared.emplace(*id, lineno).second)
        throw DuplicateError(lineno, "duplicate node id " + std::to_string(*id));
      nodes.push_back({*id, tok.size() == 3 ? std::string(tok[2]) : std::string(kUnlabeled)});
    } else if (kind == "edge") {
      if (tok.size() < 3 || tok.size() > 4) throw ParseError(lineno, "expected 'edge <src> <dst> [<label>]'");
      auto a = detail::parse_u64(tok[1]);
      auto b = detail::parse_u64(tok[2]);
      if (!a || !b) throw ParseError(lineno, "invalid edge endpoint");
      if (*a == *b) throw ParseError(lineno, "self-loop on node " + std::to_string(*a));
      edges.push_back({std::min(*a, *b), std::max(*a, *b), tok.size() == 4 ? std::string(tok[3]) : std::string()});
      edge_lines.push_back(lineno);
    } else if (kind == "graph") {
      throw ParseError(lineno, "duplicate 'graph' header");
    } else {
      throw ParseError(lineno, "unknown record '" + std::string(kind) + "'");
    }
  }
  if (!name) throw ParseError(lines.empty() ? 1 : lines.size(), "missing 'graph <name>' header");

  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    for (NodeId end : {e.a, e.b})
      if (!declared.contains(end))
        throw ReferenceError(edge_lines[i], "edge endpoint " + std::to_string(end) + " is not a declared node");
    if (!seen.insert({e.a, e.b}).second)
      throw DuplicateError(edge_lines[i], "duplicate edge " + std::to_string(e.a) + "-" + std::to_string(e.b));
  }
  return Graph(std::move(*name), std::move(nodes), std::move(edges));
}

std::string serialize_graph(const Graph& g) {
  std::vector<NodeRecord> nodes(g.nodes().begin(), g.nodes().end());
  std::sort(nodes.begin(), nodes.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  std::vector<EdgeRecord> edges(g.edges().begin(), g.edges().end());
  std::sort(edges.begin(), edges.end(),
            [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  std::string out = "graph " + g.name() + "\n";
  for (const auto& n : nodes) out += "node " + std::to_string(n.id) + " " + n.label + "\n";
  for (const auto& e : edges) {
    out += "edge " + std::to_string(e.a) + " " + std::to_string(e.b);
    if (!e.label.empty()) out += " " + e.label;
    out += "\n";
  }
  return out;
}

Graph read_graph_file(const std::filesystem::path& path) { return parse_graph(detail::read_file(path.string())); }

std::unordered_map<NodeId, std::size_t> hop_distances(const Graph& g, NodeId u) {
  if (!g.contains(u)) throw NotFoundError("unknown node id " + std::to_string(u));
  std::unordered_map<NodeId, std::size_t> dist{{u, 0}};
  std::deque<NodeId> queue{u};
  while (!queue.empty()) {
    NodeId x = queue.front();
    queue.pop_front();
    for (NodeId y : g.neighbors(x))
      if (dist.emplace(y, dist[x] + 1).second) queue.push_back(y);
  }
  return dist;
}

Graph khop_subgraph(const Graph& g, NodeId u, std::size_t hops) {
  auto dist = hop_distances(g, u);
  std::vector<NodeRecord> nodes;
  for (const auto& n : g.nodes()) {
    auto it = dist.find(n.id);
    if (it != dist.end() && it->second <= hops) nodes.push_back(n);
  }
  auto inside = [&](NodeId id) {
    auto it = dist.find(id);
    return it != dist.end() && it->second <= hops;
  };
  std::vector<EdgeRecord> edges;
  for (const auto& e : g.edges())
    if (inside(e.a) && inside(e.b)) edges.push_back(e);
  return Graph(g.name(), std::move(nodes), std::move(edges));
}

}  // namespace graphchain
