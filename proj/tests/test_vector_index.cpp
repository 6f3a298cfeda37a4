#include <doctest.h>

#include <random>
#include <sstream>

#include "graphchain/errors.hpp"
#include "graphchain/vector_index.hpp"
#include "oracles.hpp"

using namespace graphchain;
using namespace graphchain::ann;

namespace {

template <typename Scalar>
VectorSet<Scalar> uniform(std::size_t n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix<Scalar> m(d, static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = static_cast<Scalar>(u(rng));
  return VectorSet<Scalar>(std::move(m));
}

// Every node reachable from the entry point over rule and repair edges.
template <typename Scalar>
bool all_reachable(const TauMgIndex<Scalar>& idx) {
  std::vector<char> seen(idx.size(), 0);
  std::vector<std::size_t> stack{idx.entry_point()};
  seen[idx.entry_point()] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    idx.for_each_neighbor(u, [&](std::size_t v) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    });
  }
  return count == idx.size();
}

}  // namespace

TEST_CASE("occlusion predicate on a line") {
  Eigen::Vector2d u(0, 0), v(1, 0), w(0.5, 0);
  CHECK(occluded(u, v, w, 0.0));
  CHECK(occluded(u, v, w, 0.1));
  CHECK_FALSE(occluded(u, v, w, 0.2));  // 0.5 is not < 1 - 0.6
  CHECK_FALSE(occluded(u, v, Eigen::Vector2d(1.5, 0), 0.0));
  CHECK_FALSE(occluded(u, v, Eigen::Vector2d(0, 1), 0.0));  // on the sphere, not inside
}

TEST_CASE("build rejects bad input") {
  const auto set = uniform<double>(10, 3, 1);
  CHECK_THROWS_AS(TauMgIndex<double>::build(VectorSet<double>{}, 0.1), ValidationError);
  CHECK_THROWS_AS(TauMgIndex<double>::build(set, -0.1), ValidationError);
  CHECK_THROWS_AS(TauMgIndex<double>::build(set, 0.1, 0), ValidationError);
  const auto idx = TauMgIndex<double>::build(set, 0.1);
  CHECK_THROWS_AS(idx.search(set, Eigen::VectorXd::Zero(4), 8, 1), DimensionError);
  CHECK_THROWS_AS(idx.search(set, Eigen::VectorXd::Zero(3), 1, 2), ValidationError);
}

TEST_CASE("single vector") {
  const auto set = uniform<double>(1, 4, 2);
  const auto idx = TauMgIndex<double>::build(set, 0.1);
  const auto hits = idx.search(set, Eigen::VectorXd::Zero(4), 4, 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].id == 0);
}

TEST_CASE("retained edges obey the occlusion rule and every node is reachable") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto set = uniform<double>(300, 6, seed);
    const double tau = default_tau(set);
    const auto idx = TauMgIndex<double>::build(set, tau);
    CHECK(idx.audit(set).empty());
    CHECK(all_reachable(idx));
    // The audit itself, redone from the predicate.
    std::size_t violations = 0;
    for (std::size_t u = 0; u < idx.size(); ++u) {
      const auto& nb = idx.rule_neighbors(u);
      CHECK(nb.size() <= 32);
      for (std::size_t p = 0; p < nb.size(); ++p) {
        CHECK(nb[p] != u);
        for (std::size_t q = 0; q < p; ++q) {
          const double duv = (set[u] - set[nb[p]]).norm();
          violations += (set[u] - set[nb[q]]).norm() < duv && (set[nb[p]] - set[nb[q]]).norm() < duv - 3 * tau;
        }
      }
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("a larger margin keeps more edges") {
  const auto set = uniform<double>(200, 4, 5);
  const double tau = default_tau(set);
  CHECK(TauMgIndex<double>::build(set, 0.0).rule_edge_count() <=
        TauMgIndex<double>::build(set, tau).rule_edge_count());
}

TEST_CASE("search finds indexed vectors exactly and matches brute force on most queries") {
  const auto set = uniform<double>(500, 8, 9);
  const auto idx = TauMgIndex<double>::build(set, default_tau(set));
  for (std::size_t i = 0; i < set.size(); i += 25) {
    const auto hits = idx.search(set, set[i], 16, 1);
    CHECK(hits[0].id == i);
    CHECK(hits[0].distance == 0.0);
  }
  const auto queries = uniform<double>(100, 8, 10);
  int agree = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    ann::SearchStats stats;
    const auto hits = idx.search(set, queries[q], 32, 5, &stats);
    const auto truth = oracle::nearest(set.data(), queries[q], 5);
    REQUIRE(hits.size() == 5);
    for (std::size_t k = 1; k < hits.size(); ++k) CHECK(!(hits[k] < hits[k - 1]));
    agree += hits[0].id == truth[0].second;
    CHECK(stats.hops == stats.route.size());
    CHECK(stats.route.front() == idx.entry_point());
    CHECK(stats.hops > 0);
  }
  CHECK(agree >= 95);
}

TEST_CASE("brute force agrees with the oracle") {
  const auto set = uniform<double>(200, 5, 12);
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(5, 0.5);
  const auto mine = brute_force(set, q, 10);
  const auto ref = oracle::nearest(set.data(), q, 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(mine[i].id == ref[i].second);
}

TEST_CASE("ties are broken by id") {
  Matrix<double> m(1, 4);
  m << 1.0, -1.0, 1.0, 3.0;
  const VectorSet<double> set(m);
  const auto idx = TauMgIndex<double>::build(set, 0.0);
  const auto hits = idx.search(set, Eigen::VectorXd::Zero(1), 4, 3);
  CHECK(hits[0].id == 0);
  CHECK(hits[1].id == 1);
  CHECK(hits[2].id == 2);
}

TEST_CASE("float instantiation") {
  const auto set = uniform<float>(200, 6, 4);
  const auto idx = TauMgIndex<float>::build(set, default_tau(set));
  CHECK(idx.audit(set).empty());
  CHECK(idx.search(set, set[17], 16, 1)[0].id == 17);
}

TEST_CASE("save and load round trip") {
  const auto set = uniform<double>(120, 5, 6);
  const auto idx = TauMgIndex<double>::build(set, default_tau(set), 8);
  std::stringstream buf;
  idx.save(buf, {{"max_degree", "8"}});
  std::map<std::string, std::string> meta;
  const auto back = TauMgIndex<double>::load(buf, &meta);
  CHECK(meta.at("max_degree") == "8");
  CHECK(back.size() == idx.size());
  CHECK(back.tau() == idx.tau());
  CHECK(back.entry_point() == idx.entry_point());
  for (std::size_t u = 0; u < idx.size(); ++u) {
    CHECK(back.rule_neighbors(u) == idx.rule_neighbors(u));
    CHECK(back.repair_neighbors(u) == idx.repair_neighbors(u));
  }
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(5, 0.3);
  CHECK(back.search(set, q, 16, 3) == idx.search(set, q, 16, 3));

  std::stringstream vec;
  write_vectors(vec, set);
  const auto reread = read_vectors<double>(vec);
  CHECK(reread.data() == set.data());

  std::stringstream bad("taumg 2 2 0.1 0\nedges 0 5\n");
  CHECK_THROWS_AS(TauMgIndex<double>::load(bad), ParseError);
  std::stringstream badvec("2 2\n1 2\n3\n");
  CHECK_THROWS_AS(read_vectors<double>(badvec), ParseError);
}
