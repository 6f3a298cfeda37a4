#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace graphchain {

using NodeId = std::uint64_t;

inline constexpr std::string_view kUnlabeled = "_";

struct NodeRecord {
  NodeId id = 0;
  std::string label{kUnlabeled};

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

// Undirected edge, stored with a < b.
struct EdgeRecord {
  NodeId a = 0;
  NodeId b = 0;
  std::string label;

  friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

/// Undirected simple labeled graph. Immutable once constructed.
///
/// Node order is the order given at construction (file order for parsed
/// graphs); equality compares the canonical form, so two graphs listing the
/// same nodes and edges in different orders are equal.
class Graph {
 public:
  Graph() = default;

  // Validates every invariant: unique ids, non-empty whitespace-free labels,
  // existing endpoints, no self-loops, no duplicate edges.
  Graph(std::string name, std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

  const std::string& name() const noexcept { return name_; }
  std::span<const NodeRecord> nodes() const noexcept { return nodes_; }
  std::span<const EdgeRecord> edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  bool contains(NodeId id) const { return index_.contains(id); }
  const std::string& label(NodeId id) const;
  // Neighbors sorted by ascending id.
  std::span<const NodeId> neighbors(NodeId id) const;
  std::size_t degree(NodeId id) const { return neighbors(id).size(); }
  std::size_t max_degree() const noexcept;
  bool has_edge(NodeId a, NodeId b) const;
  std::vector<NodeId> sorted_ids() const;

  friend bool operator==(const Graph& lhs, const Graph& rhs);

 private:
  std::size_t position(NodeId id) const;

  std::string name_{"unnamed"};
  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::set<std::pair<NodeId, NodeId>> edge_keys_;
};

Graph parse_graph(std::string_view text);
std::string serialize_graph(const Graph& g);
Graph read_graph_file(const std::filesystem::path& path);

// Hop distance from u to every node reachable from it.
std::unordered_map<NodeId, std::size_t> hop_distances(const Graph& g, NodeId u);

// Induced subgraph on the nodes within `hops` of u. Keeps u's graph name.
Graph khop_subgraph(const Graph& g, NodeId u, std::size_t hops);

}  // namespace graphchain
