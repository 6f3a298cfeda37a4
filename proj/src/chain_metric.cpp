#include "graphchain/chain_metric.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "graphchain/errors.hpp"

namespace graphchain::metric {

namespace {

constexpr double kEps = 1e-9;

void check_shape(const ApiChain& c, const ApiChain& ref, const MatchingMatrix& m) {
  if (static_cast<std::size_t>(m.rows()) != c.size() || static_cast<std::size_t>(m.cols()) != ref.size())
    throw DimensionError("matching is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", chains are " + std::to_string(c.size()) + " and " + std::to_string(ref.size()));
  if ((m.array() != 0 && m.array() != 1).any()) throw ValidationError("matching entries must be 0 or 1");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
}

// A one-to-one matching as a row -> col map (-1 = unmatched).
using Assignment = std::vector<int>;

MatchingMatrix to_matrix(const Assignment& a, std::size_t cols) {
  MatchingMatrix m = MatchingMatrix::Zero(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] >= 0) m(static_cast<Eigen::Index>(i), a[i]) = 1;
  return m;
}

// Full objective of a one-to-one assignment; agrees with loss() on to_matrix(a).
double objective(const std::vector<std::string>& c, const std::vector<std::string>& ref, const Assignment& a,
                 double alpha, const CostModel& costs) {
  std::vector<int> inverse(ref.size(), -1);
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (a[i] < 0) {
      total += costs.deletion + alpha;
      continue;
    }
    inverse[a[i]] = static_cast<int>(i);
    if (c[i] != ref[a[i]]) total += costs.substitution;
    if (i > 0 && a[i - 1] >= 0 && a[i] != a[i - 1] + 1) total += costs.edge;
  }
  for (std::size_t j = 0; j < ref.size(); ++j) {
    if (inverse[j] < 0) {
      total += costs.insertion + alpha;
      continue;
    }
    if (j > 0 && inverse[j - 1] >= 0 && inverse[j] != inverse[j - 1] + 1) total += costs.edge;
  }
  return total;
}

class BranchAndBound {
 public:
  BranchAndBound(const std::vector<std::string>& c, const std::vector<std::string>& ref, double alpha,
                 const CostModel& costs, double bound)
      : c_(c), ref_(ref), alpha_(alpha), costs_(costs), bound_(bound),
        current_(c.size(), -1), owner_(ref.size(), -1) {}

  Assignment run() {
    descend(0, 0.0, ref_.size());
    return best_;
  }

 private:
  void descend(std::size_t row, double partial, std::size_t free_cols) {
    const std::size_t rows_left = c_.size() - row;
    const double floor = partial +
                         (free_cols > rows_left ? (free_cols - rows_left) * (costs_.insertion + alpha_) : 0.0) +
                         (rows_left > free_cols ? (rows_left - free_cols) * (costs_.deletion + alpha_) : 0.0);
    if (prunable(floor)) return;
    if (row == c_.size()) {
      accept(floor);
      return;
    }
    // Lexicographic order on M: unmatched row first, then columns right to left.
    current_[row] = -1;
    descend(row + 1, partial + costs_.deletion + alpha_, free_cols);
    for (int j = static_cast<int>(ref_.size()) - 1; j >= 0; --j) {
      if (owner_[j] >= 0) continue;
      double step = c_[row] != ref_[j] ? costs_.substitution : 0.0;
      if (row > 0 && current_[row - 1] >= 0 && j != current_[row - 1] + 1) step += costs_.edge;
      if (j > 0 && owner_[j - 1] >= 0 && owner_[j - 1] + 1 != static_cast<int>(row)) step += costs_.edge;
      if (j + 1 < static_cast<int>(ref_.size()) && owner_[j + 1] >= 0) step += costs_.edge;
      current_[row] = j;
      owner_[j] = static_cast<int>(row);
      descend(row + 1, partial + step, free_cols - 1);
      owner_[j] = -1;
    }
    current_[row] = -1;
  }

  bool prunable(double floor) const {
    if (found_) return floor >= best_cost_ - kEps;
    return floor > bound_ + kEps;
  }

  void accept(double total) {
    if (found_ ? total < best_cost_ - kEps : total <= bound_ + kEps) {
      found_ = true;
      best_cost_ = total;
      best_ = current_;
    }
  }

  const std::vector<std::string>& c_;
  const std::vector<std::string>& ref_;
  double alpha_;
  CostModel costs_;
  double bound_;
  Assignment current_;
  std::vector<int> owner_;
  bool found_ = false;
  double best_cost_ = std::numeric_limits<double>::infinity();
  Assignment best_;
};

Assignment local_search(const std::vector<std::string>& c, const std::vector<std::string>& ref, Assignment a,
                        double alpha, const CostModel& costs) {
  double current = objective(c, ref, a, alpha, costs);
  for (;;) {
    double best = current;
    Assignment best_a;
    auto consider = [&](const Assignment& cand) {
      double v = objective(c, ref, cand, alpha, costs);
      if (v < best - kEps) {
        best = v;
        best_a = cand;
      }
    };
    std::vector<bool> used(ref.size(), false);
    for (int j : a)
      if (j >= 0) used[j] = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t k = i + 1; k < a.size(); ++k) {
        if (a[i] == a[k]) continue;
        Assignment cand = a;
        std::swap(cand[i], cand[k]);
        consider(cand);
      }
      if (a[i] >= 0) {
        Assignment cand = a;
        cand[i] = -1;
        consider(cand);
      }
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (used[j]) continue;
        Assignment cand = a;
        cand[i] = static_cast<int>(j);
        consider(cand);
      }
    }
    if (best_a.empty()) return a;
    a = std::move(best_a);
    current = best;
  }
}

MatchResult finish(const ApiChain& c, const ApiChain& ref, const Assignment& a, double alpha, const CostModel& costs) {
  MatchResult r;
  r.matching = to_matrix(a, ref.size());
  r.loss = loss(c, ref, r.matching, alpha, costs);
  return r;
}

}  // namespace

MatchingMatrix empty_matching(const ApiChain& c, const ApiChain& ref) {
  return MatchingMatrix::Zero(static_cast<Eigen::Index>(c.size()), static_cast<Eigen::Index>(ref.size()));
}

double edit_cost(const ApiChain& c, const ApiChain& ref, const MatchingMatrix& m, const CostModel& costs) {
  check_shape(c, ref, m);
  const Eigen::VectorXi row_sums = m.rowwise().sum();
  const Eigen::RowVectorXi col_sums = m.colwise().sum();
  const Eigen::Index rows = m.rows(), cols = m.cols();

  double x = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (m(i, j) && c.steps[i].api != ref.steps[j].api) x += costs.substitution;
  x += costs.deletion * static_cast<double>((row_sums.array() == 0).count());
  x += costs.insertion * static_cast<double>((col_sums.array() == 0).count());

  // A pair (i, i+1) is kept when some match of i is followed by a match of i+1.
  auto kept = [&](Eigen::Index i, Eigen::Index j) { return m(i, j) && i + 1 < rows && j + 1 < cols && m(i + 1, j + 1); };
  for (Eigen::Index i = 0; i + 1 < rows; ++i) {
    if (!row_sums(i) || !row_sums(i + 1)) continue;
    bool ok = false;
    for (Eigen::Index j = 0; j < cols && !ok; ++j) ok = kept(i, j);
    if (!ok) x += costs.edge;
  }
  for (Eigen::Index j = 0; j + 1 < cols; ++j) {
    if (!col_sums(j) || !col_sums(j + 1)) continue;
    bool ok = false;
    for (Eigen::Index i = 0; i < rows && !ok; ++i) ok = kept(i, j);
    if (!ok) x += costs.edge;
  }
  return x;
}

double regularizer(const ApiChain& c, const ApiChain& ref, const MatchingMatrix& m) {
  check_shape(c, ref, m);
  const Eigen::ArrayXd row_gap = 1.0 - m.rowwise().sum().cast<double>().array();
  const Eigen::ArrayXd col_gap = 1.0 - m.colwise().sum().transpose().cast<double>().array();
  return row_gap.square().sum() + col_gap.square().sum();
}

LossBreakdown loss(const ApiChain& c, const ApiChain& ref, const MatchingMatrix& m, double alpha,
                   const CostModel& costs) {
  check_alpha(alpha);
  LossBreakdown b;
  b.edit = edit_cost(c, ref, m, costs);
  b.regularizer = regularizer(c, ref, m);
  b.alpha = alpha;
  b.total = b.edit + alpha * b.regularizer;
  return b;
}

MatchResult exhaustive_matching(const ApiChain& c, const ApiChain& ref, double alpha, const CostModel& costs) {
  check_alpha(alpha);
  const auto a = c.api_ids();
  const auto b = ref.api_ids();
  // Seed the bound with the heuristic so most of the tree is cut early.
  const auto seed = heuristic_matching(c, ref, alpha, costs);
  BranchAndBound search(a, b, alpha, costs, seed.loss.total);
  return finish(c, ref, search.run(), alpha, costs);
}

MatchResult heuristic_matching(const ApiChain& c, const ApiChain& ref, double alpha, const CostModel& costs) {
  check_alpha(alpha);
  const auto a = c.api_ids();
  const auto b = ref.api_ids();
  const Eigen::Index n = static_cast<Eigen::Index>(a.size()), m = static_cast<Eigen::Index>(b.size());
  const double forbid = 1e9;
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n + m, n + m);
  cost.topRightCorner(n, n).setConstant(forbid);
  cost.bottomLeftCorner(m, m).setConstant(forbid);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) cost(i, j) = a[i] != b[j] ? costs.substitution : 0.0;
    cost(i, m + i) = costs.deletion + alpha;
  }
  for (Eigen::Index j = 0; j < m; ++j) cost(n + j, j) = costs.insertion + alpha;

  Assignment assign(a.size(), -1);
  if (n + m > 0) {
    const auto cols = solve_assignment(cost);
    for (Eigen::Index i = 0; i < n; ++i)
      if (cols[i] < m) assign[i] = cols[i];
  }
  return finish(c, ref, local_search(a, b, std::move(assign), alpha, costs), alpha, costs);
}

MatchResult optimal_matching(const ApiChain& c, const ApiChain& ref, double alpha, const CostModel& costs) {
  if (std::max(c.size(), ref.size()) <= kExactLimit) return exhaustive_matching(c, ref, alpha, costs);
  return heuristic_matching(c, ref, alpha, costs);
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path form of the Hungarian method, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DimensionError("assignment cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j]) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace graphchain::metric
