#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "graphchain/chain.hpp"

namespace graphchain::metric {

// Binary assignment between the steps of a generated chain (rows) and a
// reference chain (cols). Entries are 0/1; row and column sums are <= 1 for
// matchings returned by the optimizers.
using MatchingMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr std::size_t kExactLimit = 7;

struct CostModel {
  double substitution = 1.0;
  double deletion = 1.0;   // generated step left unmatched
  double insertion = 1.0;  // reference step left unmatched
  double edge = 1.0;       // consecutive pair whose matches are not consecutive
};

struct LossBreakdown {
  double edit = 0.0;        // X
  double regularizer = 0.0; // Y
  double alpha = 1.0;
  double total = 0.0;       // edit + alpha * regularizer
};

struct MatchResult {
  MatchingMatrix matching;
  LossBreakdown loss;
};

MatchingMatrix empty_matching(const ApiChain& c, const ApiChain& ref);

// Matching-induced edit cost X(M). Throws DimensionError on shape mismatch.
double edit_cost(const ApiChain& c, const ApiChain& ref, const MatchingMatrix& m, const CostModel& costs = {});

// Y = sum_i (1 - sum_k M_ik)^2 + sum_k (1 - sum_i M_ik)^2
double regularizer(const ApiChain& c, const ApiChain& ref, const MatchingMatrix& m);

LossBreakdown loss(const ApiChain& c, const ApiChain& ref, const MatchingMatrix& m, double alpha,
                   const CostModel& costs = {});

// Exact minimum of X + alpha*Y over partial one-to-one matchings; the
// lexicographically smallest optimal M (row-major, 0 < 1) is returned.
MatchResult exhaustive_matching(const ApiChain& c, const ApiChain& ref, double alpha, const CostModel& costs = {});

// Optimal node-cost assignment followed by pairwise-swap local search on the
// full objective.
MatchResult heuristic_matching(const ApiChain& c, const ApiChain& ref, double alpha, const CostModel& costs = {});

// Exhaustive when max(|c|, |ref|) <= kExactLimit, heuristic otherwise.
MatchResult optimal_matching(const ApiChain& c, const ApiChain& ref, double alpha, const CostModel& costs = {});

// Minimum-cost perfect assignment on a square cost matrix; returns the
// column assigned to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace graphchain::metric
