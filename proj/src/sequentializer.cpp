#include "graphchain/sequentializer.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "graphchain/errors.hpp"

namespace graphchain {

namespace {

void extend_paths(const Graph& g, std::vector<NodeId>& stack, std::size_t max_length, std::vector<Path>& out) {
  if (stack.size() > 1) out.push_back(Path{stack});
  if (stack.size() - 1 == max_length) return;
  for (NodeId next : g.neighbors(stack.back())) {
    if (std::find(stack.begin(), stack.end(), next) != stack.end()) continue;
    stack.push_back(next);
    extend_paths(g, stack, max_length, out);
    stack.pop_back();
  }
}

using EdgeKey = std::pair<NodeId, NodeId>;

std::vector<EdgeKey> traversed(const Path& p) {
  std::vector<EdgeKey> keys;
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
    keys.push_back(std::minmax(p.nodes[i], p.nodes[i + 1]));
  return keys;
}

// Greedy subset elimination: longest paths first, a path survives only if it
// covers an edge that no survivor covers yet. Output keeps lexicographic order.
std::vector<Path> reduce(std::vector<Path> paths) {
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return paths[x].length() > paths[y].length(); });
  std::set<EdgeKey> covered;
  std::vector<bool> keep(paths.size(), false);
  for (std::size_t idx : order) {
    bool adds = false;
    for (const auto& k : traversed(paths[idx])) adds |= covered.insert(k).second;
    keep[idx] = adds;
  }
  std::vector<Path> out;
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (keep[i]) out.push_back(std::move(paths[i]));
  return out;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  }
};

}  // namespace

std::vector<Path> enumerate_paths(const Graph& g, NodeId u, std::size_t max_length) {
  if (!g.contains(u)) throw NotFoundError("unknown node id " + std::to_string(u));
  if (max_length == 0) throw ValidationError("path length bound must be at least 1");
  std::vector<Path> out;
  std::vector<NodeId> stack{u};
  extend_paths(g, stack, max_length, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Path> path_cover(const Graph& g, const PathCoverConfig& cfg) {
  if (cfg.max_length == 0) throw ValidationError("path length bound must be at least 1");
  std::vector<Path> out;
  for (NodeId u : g.sorted_ids()) {
    auto paths = enumerate_paths(g, u, cfg.max_length);
    if (cfg.minimize) paths = reduce(std::move(paths));
    std::move(paths.begin(), paths.end(), std::back_inserter(out));
  }
  return out;
}

SuperGraph condense_motifs(const Graph& g) {
  const auto ids = g.sorted_ids();
  std::unordered_map<NodeId, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;

  DisjointSets sets(ids.size());
  for (const auto& e : g.edges()) {
    // Each triangle a<b<c is found once, from its edge (a,b) and a common neighbor c > b.
    auto na = g.neighbors(e.a);
    auto nb = g.neighbors(e.b);
    std::vector<NodeId> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    for (NodeId c : common) {
      if (c < e.b) continue;
      sets.unite(pos[e.a], pos[e.b]);
      sets.unite(pos[e.a], pos[c]);
    }
  }

  SuperGraph sg;
  std::map<std::size_t, std::size_t> root_to_super;  // keyed by root == smallest member position
  std::vector<std::size_t> owner(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto root = sets.find(i);
    auto [it, fresh] = root_to_super.emplace(root, sg.super_nodes.size());
    if (fresh) sg.super_nodes.push_back(SuperNode{it->second, {}, {}});
    sg.super_nodes[it->second].members.push_back(ids[i]);
    owner[i] = it->second;
  }
  for (auto& sn : sg.super_nodes) {
    std::vector<std::string> labels;
    for (NodeId m : sn.members) labels.push_back(g.label(m));
    std::sort(labels.begin(), labels.end());
    sn.label = "{";
    for (std::size_t i = 0; i < labels.size(); ++i) sn.label += (i ? "," : "") + labels[i];
    sn.label += "}";
  }
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : g.edges()) {
    auto x = owner[pos[e.a]];
    auto y = owner[pos[e.b]];
    if (x != y) edges.insert(std::minmax(x, y));
  }
  sg.super_edges.assign(edges.begin(), edges.end());
  return sg;
}

Graph SuperGraph::as_graph(const std::string& name) const {
  std::vector<NodeRecord> nodes;
  for (const auto& sn : super_nodes) nodes.push_back({sn.id, sn.label});
  std::vector<EdgeRecord> edges;
  for (auto [x, y] : super_edges) edges.push_back({x, y, {}});
  return Graph(name, std::move(nodes), std::move(edges));
}

SequenceBundle sequentialize(const Graph& g, const PathCoverConfig& cfg) {
  SequenceBundle bundle;
  auto to_tokens = [](const Graph& src, const Path& p) {
    Sequence seq;
    for (NodeId id : p.nodes) seq.push_back(src.label(id));
    return seq;
  };
  for (auto& p : path_cover(g, cfg)) {
    bundle.base_sequences.push_back(to_tokens(g, p));
    bundle.base_paths.push_back(std::move(p));
  }
  const Graph super = condense_motifs(g).as_graph(g.name() + "#super");
  for (auto& p : path_cover(super, cfg)) {
    bundle.super_sequences.push_back(to_tokens(super, p));
    bundle.super_paths.push_back(std::move(p));
  }
  return bundle;
}

}  // namespace graphchain
