#include "graphchain/graph_similarity.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace graphchain {

namespace {

class GedSearch {
 public:
  GedSearch(const Graph& a, const Graph& b) : a_(a), b_(b), a_ids_(a.sorted_ids()), b_ids_(b.sorted_ids()) {
    image_.assign(a_ids_.size(), -1);
    used_.assign(b_ids_.size(), false);
    best_ = static_cast<double>(a.node_count() + b.node_count() + a.edge_count() + b.edge_count());
  }

  double run() {
    descend(0, 0.0);
    return best_;
  }

 private:
  void descend(std::size_t i, double partial) {
    const std::size_t left = a_ids_.size() - i;
    const std::size_t free = static_cast<std::size_t>(std::count(used_.begin(), used_.end(), false));
    const double floor = partial + (free > left ? static_cast<double>(free - left) : 0.0);
    if (floor >= best_) return;
    if (i == a_ids_.size()) {
      best_ = std::min(best_, partial + leaf_cost());
      return;
    }
    for (std::size_t j = 0; j < b_ids_.size(); ++j) {
      if (used_[j]) continue;
      double step = a_.label(a_ids_[i]) != b_.label(b_ids_[j]) ? 1.0 : 0.0;
      for (std::size_t p = 0; p < i; ++p) {
        const bool ea = a_.has_edge(a_ids_[p], a_ids_[i]);
        const bool eb = image_[p] >= 0 && b_.has_edge(b_ids_[image_[p]], b_ids_[j]);
        if (ea != eb) step += 1.0;
      }
      image_[i] = static_cast<int>(j);
      used_[j] = true;
      descend(i + 1, partial + step);
      used_[j] = false;
    }
    // Delete node i together with its edges to earlier nodes.
    double step = 1.0;
    for (std::size_t p = 0; p < i; ++p)
      if (a_.has_edge(a_ids_[p], a_ids_[i])) step += 1.0;
    image_[i] = -1;
    descend(i + 1, partial + step);
  }

  // Inserted nodes of b plus every b edge touching one of them.
  double leaf_cost() const {
    double cost = 0.0;
    for (std::size_t j = 0; j < b_ids_.size(); ++j)
      if (!used_[j]) cost += 1.0;
    std::vector<bool> mapped(b_ids_.size(), false);
    for (int j : image_)
      if (j >= 0) mapped[j] = true;
    for (const auto& e : b_.edges()) {
      auto ja = std::lower_bound(b_ids_.begin(), b_ids_.end(), e.a) - b_ids_.begin();
      auto jb = std::lower_bound(b_ids_.begin(), b_ids_.end(), e.b) - b_ids_.begin();
      if (!mapped[ja] || !mapped[jb]) cost += 1.0;
    }
    return cost;
  }

  const Graph& a_;
  const Graph& b_;
  std::vector<NodeId> a_ids_, b_ids_;
  std::vector<int> image_;
  std::vector<bool> used_;
  double best_;
};

template <typename Key>
double multiset_jaccard(const std::map<Key, std::size_t>& x, const std::map<Key, std::size_t>& y) {
  double inter = 0.0, uni = 0.0;
  auto ix = x.begin(), iy = y.begin();
  while (ix != x.end() || iy != y.end()) {
    if (iy == y.end() || (ix != x.end() && ix->first < iy->first)) {
      uni += static_cast<double>(ix++->second);
    } else if (ix == x.end() || iy->first < ix->first) {
      uni += static_cast<double>(iy++->second);
    } else {
      inter += static_cast<double>(std::min(ix->second, iy->second));
      uni += static_cast<double>(std::max(ix->second, iy->second));
      ++ix;
      ++iy;
    }
  }
  return uni == 0.0 ? 1.0 : inter / uni;
}

std::map<std::string, std::size_t> label_counts(const Graph& g) {
  std::map<std::string, std::size_t> m;
  for (const auto& n : g.nodes()) ++m[n.label];
  return m;
}

std::map<std::pair<std::string, std::string>, std::size_t> edge_label_counts(const Graph& g) {
  std::map<std::pair<std::string, std::string>, std::size_t> m;
  for (const auto& e : g.edges()) ++m[std::minmax(g.label(e.a), g.label(e.b))];
  return m;
}

}  // namespace

std::optional<double> exact_graph_edit_distance(const Graph& a, const Graph& b, std::size_t limit) {
  if (a.node_count() > limit || b.node_count() > limit) return std::nullopt;
  return GedSearch(a, b).run();
}

GraphSimilarity graph_similarity(const Graph& a, const Graph& b) {
  if (auto ged = exact_graph_edit_distance(a, b)) {
    const double scale = static_cast<double>(a.node_count() + b.node_count() + a.edge_count() + b.edge_count());
    return {scale == 0.0 ? 1.0 : 1.0 - *ged / scale, ged};
  }
  const double labels = multiset_jaccard(label_counts(a), label_counts(b));
  const double edges = multiset_jaccard(edge_label_counts(a), edge_label_counts(b));
  return {0.5 * labels + 0.5 * edges, std::nullopt};
}

}  // namespace graphchain
