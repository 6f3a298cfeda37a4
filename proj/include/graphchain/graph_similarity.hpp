#pragma once

#include <cstddef>
#include <optional>

#include "graphchain/graph.hpp"

namespace graphchain {

inline constexpr std::size_t kExactGedLimit = 8;

// Exact graph edit distance with unit costs (node substitution, insertion,
// deletion, edge insertion, deletion) by branch and bound over node maps.
// Empty when either graph has more than `limit` nodes.
std::optional<double> exact_graph_edit_distance(const Graph& a, const Graph& b, std::size_t limit = kExactGedLimit);

struct GraphSimilarity {
  double similarity = 0.0;               // in [0, 1], 1 for identical structure
  std::optional<double> edit_distance;   // present when computed exactly
};

// 1 - GED / (|Va| + |Vb| + |Ea| + |Eb|) when exact; otherwise the mean of the
// label-multiset and edge-label-pair multiset Jaccard indices.
GraphSimilarity graph_similarity(const Graph& a, const Graph& b);

}  // namespace graphchain
