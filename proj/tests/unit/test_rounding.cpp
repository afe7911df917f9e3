#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "sgmm/error.hpp"
#include "sgmm/metrics.hpp"
#include "sgmm/rounding.hpp"

using namespace sgmm;

namespace {

bool is_partition(const BallCover& cover, int n) {
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& s : cover.sets) {
    total += s.size();
    seen.insert(s.begin(), s.end());
  }
  return total == static_cast<std::size_t>(n) && seen.size() == static_cast<std::size_t>(n) &&
         *seen.begin() == 0 && *seen.rbegin() == n - 1;
}

}  // namespace

TEST_SUITE("rounding") {
  TEST_CASE("Y* gives exactly the true clusters") {
    Rng rng(1);
    for (int k : {2, 3, 5}) {
      const int n = 10 * k;
      const Labels labels = oracle::random_balanced(n, k, rng);
      const BallCover cover = extract_balls(cluster_matrix(labels), k);
      REQUIRE(cover.sets.size() == static_cast<std::size_t>(k));
      for (const auto& s : cover.sets) {
        CHECK(s.size() == static_cast<std::size_t>(n / k));
        for (int i : s) CHECK(labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(s.front())]);
      }
      CHECK(misrate(cluster(cluster_matrix(labels), k), labels, k).rate == 0.0);
    }
  }

  TEST_CASE("rows perturbed by less than n/(16k) in l1 round like Y*") {
    Rng rng(2);
    const int n = 48, k = 3;
    const Labels labels = oracle::random_balanced(n, k, rng);
    const SymMatrix star = cluster_matrix(labels);
    const double budget = 0.99 * n / (16.0 * k);
    Eigen::MatrixXd y = star.dense();
    // Symmetric perturbation whose every row has l1 mass below budget: each
    // entry at most budget / n in magnitude.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) y(i, j) = y(j, i) = y(i, j) + (2.0 * rng.uniform() - 1.0) * budget / n;
    for (int i = 0; i < n; ++i) REQUIRE((y.row(i) - star.dense().row(i)).lpNorm<1>() < n / (16.0 * k));
    CHECK(cluster(SymMatrix(y), k) == cluster(star, k));
  }

  TEST_CASE("identical rows: every round takes n/k points") {
    const BallCover cover = extract_balls(SymMatrix::constant(12, 0.25), 4);
    REQUIRE(cover.sets.size() == 4);
    for (const auto& s : cover.sets) CHECK(s.size() == 3);
    CHECK(is_partition(cover, 12));
    const Labels labels = cluster(SymMatrix::constant(12, 0.25), 4);
    CHECK(oracle::is_balanced(labels, 4));
  }

  TEST_CASE("equalize examples") {
    BallCover exact;
    exact.sets = {{3, 4, 5}, {0, 1, 2}};
    CHECK(equalize(exact, 6, 2) == Labels{1, 1, 1, 0, 0, 0});

    BallCover split;
    split.sets = {{0, 1, 2, 3}, {4, 5, 6, 7}, {8}, {9, 10, 11}};
    const Labels labels = equalize(split, 12, 3);
    CHECK(oracle::is_balanced(labels, 3));
    // Keeps sets 0, 1 and 3; point 8 fills the deficient third cluster.
    CHECK(labels[8] == 2);
    CHECK(labels[9] == 2);

    BallCover overlap;
    overlap.sets = {{0, 1}, {1, 2}};
    CHECK_THROWS_AS(equalize(overlap, 4, 2), InputError);
    BallCover oversized;
    oversized.sets = {{0, 1, 2}, {3}};
    CHECK_THROWS_AS(equalize(oversized, 4, 2), InputError);
  }

  TEST_CASE("equalize balances every random cover") {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(4));
      const int size = 1 + static_cast<int>(rng.below(5));
      const int n = k * size;
      std::vector<int> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span<int>(order));
      BallCover cover;
      for (std::size_t at = 0; at < order.size();) {
        const std::size_t len = 1 + rng.below(static_cast<std::uint64_t>(size));
        const std::size_t end = std::min(order.size(), at + len);
        cover.sets.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                                order.begin() + static_cast<std::ptrdiff_t>(end));
        at = end;
      }
      CHECK(oracle::is_balanced(equalize(cover, n, k), k));
    }
  }

  TEST_CASE("random fractional input still yields a balanced partition") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd y(20, 20);
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j <= i; ++j) y(i, j) = y(j, i) = rng.uniform();
      const BallCover cover = extract_balls(SymMatrix(y), 4, 1.0 + 4.0 * rng.uniform());
      CHECK(is_partition(cover, 20));
      for (const auto& s : cover.sets) CHECK(s.size() <= 5);
      CHECK(oracle::is_balanced(cluster(SymMatrix(y), 4), 4));
    }
    CHECK(oracle::is_balanced(cluster(SymMatrix::constant(12, 1.0 / 3.0), 3), 3));
  }
}
