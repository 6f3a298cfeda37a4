#pragma once

// Proximity-graph ANN index whose edges survive a tau-parameterized occlusion
// rule, searched by best-first greedy routing. Vectors are the columns of a
// dense Eigen matrix; everything is templated on the scalar type.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"

namespace graphchain::ann {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense set of n vectors of dimension m, one per column; ids are 0..n-1.
template <typename Scalar>
class VectorSet {
 public:
  VectorSet() = default;
  explicit VectorSet(Matrix<Scalar> columns) : data_(std::move(columns)) {}

  Eigen::Index dim() const noexcept { return data_.rows(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  bool empty() const noexcept { return data_.cols() == 0; }
  auto operator[](std::size_t id) const { return data_.col(static_cast<Eigen::Index>(id)); }
  const Matrix<Scalar>& data() const noexcept { return data_; }

 private:
  Matrix<Scalar> data_;
};

template <typename DA, typename DB>
typename DA::Scalar distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.size() != b.size())
    throw DimensionError("vector dimensions differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  return (a - b).norm();
}

/// True when w witnesses the removal of edge (u, v): w lies strictly inside
/// both ball(u, d(u,v)) and ball(v, d(u,v) - 3 tau).
template <typename DU, typename DV, typename DW>
bool occluded(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v, const Eigen::MatrixBase<DW>& w,
              typename DU::Scalar tau) {
  using Scalar = typename DU::Scalar;
  if (tau < Scalar(0)) throw ValidationError("tau must be non-negative");
  const Scalar uv = distance(u, v);
  return distance(u, w) < uv && distance(v, w) < uv - Scalar(3) * tau;
}

template <typename Scalar>
struct AnnResult {
  std::size_t id = 0;
  Scalar distance = 0;

  friend bool operator<(const AnnResult& a, const AnnResult& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  }
  friend bool operator==(const AnnResult&, const AnnResult&) = default;
};

struct SearchStats {
  std::size_t hops = 0;                  // nodes expanded
  std::size_t distance_evaluations = 0;
  std::vector<std::size_t> route;        // expansion order
};

/// Exact k nearest neighbours by full scan, ordered by (distance, id).
template <typename Scalar, typename Derived>
std::vector<AnnResult<Scalar>> brute_force(const VectorSet<Scalar>& set, const Eigen::MatrixBase<Derived>& query,
                                           std::size_t k) {
  if (query.size() != set.dim()) throw DimensionError("query dimension does not match the vector set");
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> dist = (set.data().colwise() - query).colwise().norm();
  std::vector<AnnResult<Scalar>> all(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) all[i] = {i, dist(static_cast<Eigen::Index>(i))};
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return all;
}

/// Mean pairwise distance over an evenly strided sample of at most
/// `sample` vectors, times `fraction`.
template <typename Scalar>
Scalar default_tau(const VectorSet<Scalar>& set, Scalar fraction = Scalar(0.05), std::size_t sample = 1000) {
  const std::size_t n = set.size();
  if (n < 2) return Scalar(0);
  const std::size_t s = std::min(n, sample);
  std::vector<std::size_t> ids(s);
  for (std::size_t i = 0; i < s; ++i) ids[i] = i * n / s;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i + 1; j < s; ++j, ++pairs) sum += static_cast<double>((set[ids[i]] - set[ids[j]]).norm());
  return static_cast<Scalar>(fraction * sum / static_cast<double>(pairs));
}

struct OcclusionViolation {
  std::size_t u = 0, v = 0, witness = 0;
};

template <typename Scalar>
class TauMgIndex {
 public:
  static constexpr std::size_t kUnboundedDegree = std::numeric_limits<std::size_t>::max();

  TauMgIndex() = default;

  /// Scans every other vector nearest-first and keeps v unless an already
  /// kept neighbour occludes it, up to max_degree edges. Unreachable nodes are
  /// then attached from their nearest reachable node.
  static TauMgIndex build(const VectorSet<Scalar>& set, Scalar tau, std::size_t max_degree = 32) {
    if (set.empty()) throw ValidationError("cannot index an empty vector set");
    if (tau < Scalar(0)) throw ValidationError("tau must be non-negative");
    if (max_degree == 0) throw ValidationError("max_degree must be positive");
    const std::size_t n = set.size();
    TauMgIndex index;
    index.tau_ = tau;
    index.dim_ = set.dim();
    index.rule_.assign(n, {});
    index.repair_.assign(n, {});
    std::vector<double> spread(n, 0.0);

#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t iu = 0; iu < static_cast<std::ptrdiff_t>(n); ++iu) {
      const auto u = static_cast<std::size_t>(iu);
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> dist = (set.data().colwise() - set[u]).colwise().norm();
      spread[u] = static_cast<double>(dist.sum());
      std::vector<std::pair<Scalar, std::size_t>> order;
      order.reserve(n - 1);
      for (std::size_t v = 0; v < n; ++v)
        if (v != u) order.emplace_back(dist(static_cast<Eigen::Index>(v)), v);
      std::sort(order.begin(), order.end());
      auto& kept = index.rule_[u];
      std::vector<Scalar> kept_dist;  // d(u, w) for each kept w, same expression as occluded()
      for (const auto& [approx, v] : order) {
        if (kept.size() >= max_degree) break;
        const Scalar duv = (set[u] - set[v]).norm();
        bool blocked = false;
        for (std::size_t i = 0; i < kept.size() && !blocked; ++i)
          blocked = kept_dist[i] < duv && (set[v] - set[kept[i]]).norm() < duv - Scalar(3) * tau;
        if (!blocked) {
          kept.push_back(v);
          kept_dist.push_back(duv);
        }
      }
    }

    index.entry_ = static_cast<std::size_t>(std::min_element(spread.begin(), spread.end()) - spread.begin());
    index.repair_reachability(set);
    return index;
  }

  Scalar tau() const noexcept { return tau_; }
  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return rule_.size(); }
  std::size_t entry_point() const noexcept { return entry_; }

  /// Edges retained by the occlusion rule, in construction order.
  const std::vector<std::size_t>& rule_neighbors(std::size_t u) const { return rule_.at(u); }
  /// Edges added to make every node reachable from the entry point.
  const std::vector<std::size_t>& repair_neighbors(std::size_t u) const { return repair_.at(u); }

  std::size_t rule_edge_count() const {
    std::size_t c = 0;
    for (const auto& l : rule_) c += l.size();
    return c;
  }
  std::size_t repair_edge_count() const {
    std::size_t c = 0;
    for (const auto& l : repair_) c += l.size();
    return c;
  }

  template <typename F>
  void for_each_neighbor(std::size_t u, F&& f) const {
    for (std::size_t v : rule_[u]) f(v);
    for (std::size_t v : repair_[u]) f(v);
  }

  /// Best-first beam search from the entry point. The pool keeps the `beam`
  /// closest nodes seen; the closest unexpanded one is expanded next, and the
  /// search ends once every pooled node has been expanded.
  template <typename Derived>
  std::vector<AnnResult<Scalar>> search(const VectorSet<Scalar>& set, const Eigen::MatrixBase<Derived>& query,
                                        std::size_t beam, std::size_t k, SearchStats* stats = nullptr) const {
    if (query.size() != dim_) throw DimensionError("query dimension does not match the index");
    if (set.size() != size()) throw DimensionError("vector set does not match the index");
    if (k == 0 || beam < k) throw ValidationError("search needs beam >= k >= 1");

    struct Entry {
      AnnResult<Scalar> r;
      bool expanded;
    };
    std::vector<Entry> pool;
    pool.reserve(beam + 1);
    std::vector<char> seen(size(), 0);
    SearchStats local;

    auto offer = [&](std::size_t id) {
      seen[id] = 1;
      ++local.distance_evaluations;
      AnnResult<Scalar> cand{id, (set[id] - query).norm()};
      if (pool.size() >= beam && !(cand < pool.back().r)) return;
      auto pos = std::lower_bound(pool.begin(), pool.end(), cand, [](const Entry& e, const AnnResult<Scalar>& c) { return e.r < c; });
      pool.insert(pos, Entry{cand, false});
      if (pool.size() > beam) pool.pop_back();
    };

    offer(entry_);
    for (;;) {
      auto next = std::find_if(pool.begin(), pool.end(), [](const Entry& e) { return !e.expanded; });
      if (next == pool.end()) break;
      next->expanded = true;
      const std::size_t u = next->r.id;
      ++local.hops;
      local.route.push_back(u);
      for_each_neighbor(u, [&](std::size_t v) {
        if (!seen[v]) offer(v);
      });
    }

    std::vector<AnnResult<Scalar>> out;
    for (std::size_t i = 0; i < std::min(k, pool.size()); ++i) out.push_back(pool[i].r);
    if (stats) *stats = std::move(local);
    return out;
  }

  /// Every rule edge (u, v) checked against each rule edge (u, w) that was
  /// kept before it. An empty result means the graph obeys the rule.
  std::vector<OcclusionViolation> audit(const VectorSet<Scalar>& set) const {
    if (set.size() != size() || set.dim() != dim_) throw DimensionError("vector set does not match the index");
    std::vector<OcclusionViolation> bad;
    for (std::size_t u = 0; u < size(); ++u) {
      const auto& kept = rule_[u];
      for (std::size_t p = 0; p < kept.size(); ++p)
        for (std::size_t q = 0; q < p; ++q)
          if (occluded(set[u], set[kept[p]], set[kept[q]], tau_)) bad.push_back({u, kept[p], kept[q]});
    }
    return bad;
  }

  /// `taumg <n> <d> <tau> <entry> [key=value]...`, then `edges <id> <nbr>*`
  /// per node and `repair <id> <nbr>*` for nodes with repair edges.
  void save(std::ostream& out, const std::map<std::string, std::string>& meta = {}) const {
    out << "taumg " << size() << ' ' << dim_ << ' ' << std::setprecision(std::numeric_limits<Scalar>::max_digits10)
        << tau_ << ' ' << entry_;
    for (const auto& [k, v] : meta) out << ' ' << k << '=' << v;
    out << '\n';
    for (std::size_t u = 0; u < size(); ++u) {
      out << "edges " << u;
      for (std::size_t v : rule_[u]) out << ' ' << v;
      out << '\n';
    }
    for (std::size_t u = 0; u < size(); ++u) {
      if (repair_[u].empty()) continue;
      out << "repair " << u;
      for (std::size_t v : repair_[u]) out << ' ' << v;
      out << '\n';
    }
  }

  static TauMgIndex load(std::istream& in, std::map<std::string, std::string>* meta = nullptr) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() {
      while (std::getline(in, line)) {
        ++lineno;
        if (!detail::trim(line).empty()) return true;
      }
      return false;
    };
    if (!next_line()) throw ParseError(1, "missing taumg header");
    auto head = detail::split_ws(line);
    if (head.size() < 5 || head[0] != "taumg") throw ParseError(lineno, "expected 'taumg <n> <d> <tau> <entry>'");
    auto n = detail::parse_u64(head[1]);
    auto d = detail::parse_u64(head[2]);
    auto tau = detail::parse_double(head[3]);
    auto entry = detail::parse_u64(head[4]);
    if (!n || !d || !tau || !entry || *n == 0 || *entry >= *n) throw ParseError(lineno, "invalid taumg header");
    TauMgIndex index;
    index.tau_ = static_cast<Scalar>(*tau);
    index.dim_ = static_cast<Eigen::Index>(*d);
    index.entry_ = *entry;
    index.rule_.assign(*n, {});
    index.repair_.assign(*n, {});
    for (std::size_t i = 5; i < head.size(); ++i) {
      auto eq = head[i].find('=');
      if (eq == std::string_view::npos) throw ParseError(lineno, "invalid header attribute");
      if (meta) (*meta)[std::string(head[i].substr(0, eq))] = std::string(head[i].substr(eq + 1));
    }
    while (next_line()) {
      auto tok = detail::split_ws(line);
      const bool is_rule = tok[0] == "edges";
      if ((!is_rule && tok[0] != "repair") || tok.size() < 2) throw ParseError(lineno, "expected 'edges <id> <neighbor>*'");
      auto u = detail::parse_u64(tok[1]);
      if (!u || *u >= *n) throw ParseError(lineno, "node id out of range");
      auto& list = is_rule ? index.rule_[*u] : index.repair_[*u];
      for (std::size_t i = 2; i < tok.size(); ++i) {
        auto v = detail::parse_u64(tok[i]);
        if (!v || *v >= *n) throw ParseError(lineno, "neighbor id out of range");
        list.push_back(*v);
      }
    }
    return index;
  }

 private:
  void repair_reachability(const VectorSet<Scalar>& set) {
    const std::size_t n = size();
    std::vector<char> reached(n, 0);
    std::vector<std::size_t> reachable;
    auto flood = [&](std::size_t start) {
      std::deque<std::size_t> queue{start};
      reached[start] = 1;
      reachable.push_back(start);
      while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for_each_neighbor(u, [&](std::size_t v) {
          if (reached[v]) return;
          reached[v] = 1;
          reachable.push_back(v);
          queue.push_back(v);
        });
      }
    };
    flood(entry_);
    for (std::size_t x = 0; x < n; ++x) {
      if (reached[x]) continue;
      AnnResult<Scalar> best{reachable.front(), std::numeric_limits<Scalar>::infinity()};
      for (std::size_t y : reachable) {
        AnnResult<Scalar> cand{y, (set[x] - set[y]).norm()};
        if (cand < best) best = cand;
      }
      repair_[best.id].push_back(x);
      flood(x);
    }
  }

  Scalar tau_ = 0;
  Eigen::Index dim_ = 0;
  std::size_t entry_ = 0;
  std::vector<std::vector<std::size_t>> rule_;
  std::vector<std::vector<std::size_t>> repair_;
};

/// `<n> <d>` header, then n lines of d reals.
template <typename Scalar>
VectorSet<Scalar> read_vectors(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto lines = detail::split_lines(text);
  std::size_t i = 0;
  auto skip_blank = [&]() {
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
  };
  skip_blank();
  if (i >= lines.size()) throw ParseError(1, "missing '<n> <d>' header");
  auto head = detail::split_ws(lines[i]);
  auto n = head.size() == 2 ? detail::parse_u64(head[0]) : std::nullopt;
  auto d = head.size() == 2 ? detail::parse_u64(head[1]) : std::nullopt;
  if (!n || !d || *d == 0) throw ParseError(i + 1, "expected '<n> <d>' header");
  Matrix<Scalar> data(static_cast<Eigen::Index>(*d), static_cast<Eigen::Index>(*n));
  ++i;
  for (std::size_t row = 0; row < *n; ++row) {
    skip_blank();
    if (i >= lines.size()) throw ParseError(i, "expected " + std::to_string(*n) + " vectors");
    auto tok = detail::split_ws(lines[i]);
    if (tok.size() != *d) throw ParseError(i + 1, "expected " + std::to_string(*d) + " values");
    for (std::size_t c = 0; c < *d; ++c) {
      auto v = detail::parse_double(tok[c]);
      if (!v) throw ParseError(i + 1, "invalid number '" + std::string(tok[c]) + "'");
      data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(row)) = static_cast<Scalar>(*v);
    }
    ++i;
  }
  return VectorSet<Scalar>(std::move(data));
}

template <typename Scalar>
void write_vectors(std::ostream& out, const VectorSet<Scalar>& set) {
  out << set.size() << ' ' << set.dim() << '\n' << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (Eigen::Index c = 0; c < set.dim(); ++c) out << (c ? " " : "") << set[i](c);
    out << '\n';
  }
}

}  // namespace graphchain::ann
