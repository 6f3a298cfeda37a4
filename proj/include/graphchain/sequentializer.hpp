#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "graphchain/graph.hpp"

namespace graphchain {

// Simple path; nodes.front() is the origin.
struct Path {
  std::vector<NodeId> nodes;

  NodeId origin() const { return nodes.front(); }
  std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }

  friend auto operator<=>(const Path&, const Path&) = default;
  friend bool operator==(const Path&, const Path&) = default;
};

struct PathCoverConfig {
  std::size_t max_length = 2;  // l, in edges; must be >= 1
  bool minimize = false;
};

struct SuperNode {
  std::size_t id = 0;
  std::vector<NodeId> members;  // ascending
  std::string label;            // canonical multiset of member labels, e.g. "{C,C,O}"
};

// Motif-level condensation of a base graph: triangles merged by union-find,
// every other node a singleton.
struct SuperGraph {
  std::vector<SuperNode> super_nodes;
  std::vector<std::pair<std::size_t, std::size_t>> super_edges;  // (lo, hi), ascending

  // Super-nodes become nodes (id = super-node id, label = motif label).
  Graph as_graph(const std::string& name) const;
};

using Sequence = std::vector<std::string>;

struct SequenceBundle {
  std::vector<Sequence> base_sequences;
  std::vector<Sequence> super_sequences;
  // provenance: base_paths[i] produced base_sequences[i]; super_paths over super-node ids.
  std::vector<Path> base_paths;
  std::vector<Path> super_paths;

  bool empty() const { return base_sequences.empty() && super_sequences.empty(); }
};

// All simple paths from u with 1 <= length <= max_length, lexicographic by node ids.
std::vector<Path> enumerate_paths(const Graph& g, NodeId u, std::size_t max_length);

// Per-origin path cover, origins in ascending id order.
std::vector<Path> path_cover(const Graph& g, const PathCoverConfig& cfg);

SuperGraph condense_motifs(const Graph& g);

SequenceBundle sequentialize(const Graph& g, const PathCoverConfig& cfg);

}  // namespace graphchain
