#pragma once

// Reference implementations used to check the library. They share no code
// with it beyond the data types.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "graphchain/chain.hpp"
#include "graphchain/graph.hpp"

namespace oracle {

using graphchain::ApiChain;
using graphchain::Graph;
using graphchain::NodeId;

using Adjacency = std::map<NodeId, std::set<NodeId>>;
using Edge = std::pair<NodeId, NodeId>;

inline Adjacency adjacency(const Graph& g) {
  Adjacency adj;
  for (const auto& n : g.nodes()) adj[n.id];
  for (const auto& e : g.edges()) {
    adj[e.a].insert(e.b);
    adj[e.b].insert(e.a);
  }
  return adj;
}

inline Edge edge_key(NodeId a, NodeId b) { return {std::min(a, b), std::max(a, b)}; }

inline std::map<NodeId, std::size_t> bfs(const Graph& g, NodeId s) {
  const auto adj = adjacency(g);
  std::map<NodeId, std::size_t> dist{{s, 0}};
  std::deque<NodeId> q{s};
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId v : adj.at(u))
      if (!dist.contains(v)) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
  }
  return dist;
}

// Edges a path of at most `hops` edges from u can traverse: those with an
// endpoint strictly closer than `hops`.
inline std::set<Edge> reachable_edges(const Graph& g, NodeId u, std::size_t hops) {
  const auto dist = bfs(g, u);
  std::set<Edge> out;
  for (const auto& e : g.edges()) {
    auto da = dist.find(e.a), db = dist.find(e.b);
    if (da == dist.end() || db == dist.end()) continue;
    if (std::min(da->second, db->second) + 1 <= hops) out.insert(edge_key(e.a, e.b));
  }
  return out;
}

// Random simple graph with ids 0..n-1, labels from `alphabet`, degree <= max_degree.
inline Graph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t max_degree, std::size_t attempts,
                          const std::vector<std::string>& alphabet = {"C", "N", "O"}) {
  std::vector<graphchain::NodeRecord> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({i, alphabet[rng() % alphabet.size()]});
  std::set<Edge> edges;
  std::vector<std::size_t> deg(n, 0);
  for (std::size_t t = 0; n > 1 && t < attempts; ++t) {
    NodeId a = rng() % n, b = rng() % n;
    if (a == b || deg[a] >= max_degree || deg[b] >= max_degree || edges.contains(edge_key(a, b))) continue;
    edges.insert(edge_key(a, b));
    ++deg[a];
    ++deg[b];
  }
  std::vector<graphchain::EdgeRecord> er;
  for (auto [a, b] : edges) er.push_back({a, b, {}});
  std::shuffle(er.begin(), er.end(), rng);
  return Graph("random", std::move(nodes), std::move(er));
}

// Triangles merged with a union-find; returns member sets of every class.
inline std::set<std::set<NodeId>> triangle_classes(const Graph& g) {
  const auto adj = adjacency(g);
  std::map<NodeId, NodeId> parent;
  for (const auto& [u, _] : adj) parent[u] = u;
  std::function<NodeId(NodeId)> find = [&](NodeId x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& [u, nu] : adj)
    for (NodeId v : nu)
      for (NodeId w : nu)
        if (u < v && v < w && adj.at(v).contains(w)) {
          parent[find(v)] = find(u);
          parent[find(w)] = find(u);
        }
  std::map<NodeId, std::set<NodeId>> groups;
  for (const auto& [u, _] : adj) groups[find(u)].insert(u);
  std::set<std::set<NodeId>> out;
  for (auto& [_, s] : groups) out.insert(s);
  return out;
}

// ---- chain loss -------------------------------------------------------------

// match[i] = j or -1. Unit costs.
using Match = std::vector<int>;

inline double edit_cost(const std::vector<std::string>& c, const std::vector<std::string>& r, const Match& m) {
  std::vector<int> inv(r.size(), -1);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (m[i] >= 0) inv[static_cast<std::size_t>(m[i])] = static_cast<int>(i);
  double x = 0;
  for (std::size_t i = 0; i < c.size(); ++i) x += m[i] < 0 ? 1 : (c[i] != r[static_cast<std::size_t>(m[i])]);
  for (int v : inv) x += v < 0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    if (m[i] >= 0 && m[i + 1] >= 0 && m[i + 1] != m[i] + 1) x += 1;
  for (std::size_t j = 0; j + 1 < r.size(); ++j)
    if (inv[j] >= 0 && inv[j + 1] >= 0 && inv[j + 1] != inv[j] + 1) x += 1;
  return x;
}

// Y for an arbitrary 0/1 matrix given as rows.
inline double regularizer(const std::vector<std::vector<int>>& m, std::size_t rows, std::size_t cols) {
  double y = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0;
    for (std::size_t k = 0; k < cols; ++k) s += m[i][k];
    y += (1 - s) * (1 - s);
  }
  for (std::size_t k = 0; k < cols; ++k) {
    double s = 0;
    for (std::size_t i = 0; i < rows; ++i) s += m[i][k];
    y += (1 - s) * (1 - s);
  }
  return y;
}

inline double loss(const std::vector<std::string>& c, const std::vector<std::string>& r, const Match& m, double alpha) {
  std::size_t unmatched = 0;
  std::vector<char> used(r.size(), 0);
  for (int j : m) {
    if (j < 0) ++unmatched;
    else used[static_cast<std::size_t>(j)] = 1;
  }
  for (char u : used) unmatched += !u;
  return edit_cost(c, r, m) + alpha * static_cast<double>(unmatched);
}

// Minimum over every partial injective matching.
inline double min_loss(const std::vector<std::string>& c, const std::vector<std::string>& r, double alpha) {
  double best = INFINITY;
  Match m(c.size(), -1);
  std::vector<char> used(r.size(), 0);
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == c.size()) {
      best = std::min(best, loss(c, r, m, alpha));
      return;
    }
    m[i] = -1;
    go(i + 1);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      m[i] = static_cast<int>(j);
      go(i + 1);
      used[j] = 0;
    }
    m[i] = -1;
  };
  go(0);
  return best;
}

inline std::vector<std::string> random_ids(std::mt19937_64& rng, std::size_t max_len, std::size_t alphabet,
                                           std::size_t min_len = 0) {
  std::vector<std::string> out(min_len + rng() % (max_len - min_len + 1));
  for (auto& s : out) s = std::string(1, static_cast<char>('a' + rng() % alphabet));
  return out;
}

// ---- vectors ----------------------------------------------------------------

template <typename Mat, typename Vec>
std::vector<std::pair<double, std::size_t>> nearest(const Mat& columns, const Vec& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (long i = 0; i < columns.cols(); ++i) {
    double s = 0;
    for (long r = 0; r < columns.rows(); ++r) s += (columns(r, i) - q[r]) * (columns(r, i) - q[r]);
    all.emplace_back(std::sqrt(s), static_cast<std::size_t>(i));
  }
  std::sort(all.begin(), all.end());
  all.resize(std::min(k, all.size()));
  return all;
}

template <typename A, typename B>
double cosine(const A& a, const B& b) {
  double dot = 0, na = 0, nb = 0;
  for (long i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace oracle
