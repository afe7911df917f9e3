#include <doctest.h>

#include "oracles.hpp"
#include "sgmm/error.hpp"
#include "sgmm/metrics.hpp"

using namespace sgmm;

TEST_SUITE("metrics") {
  TEST_CASE("misrate examples") {
    const Labels star = {0, 0, 0, 1, 1, 1};
    CHECK(misrate(star, star, 2).rate == 0.0);
    CHECK(misrate({1, 1, 1, 0, 0, 0}, star, 2).rate == 0.0);
    const Misrate one = misrate({0, 0, 1, 1, 1, 1}, star, 2);
    CHECK(one.rate == doctest::Approx(1.0 / 6.0));
    CHECK(one.mismatches == 1);
    CHECK(one.perm == std::vector<int>{0, 1});
    CHECK_THROWS_AS(misrate({0, 2}, {0, 1}, 2), InputError);
    CHECK_THROWS_AS(misrate({0, 1, 1}, {0, 1}, 2), InputError);
  }

  TEST_CASE("misrate matches brute force over permutations") {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(6));
      const int n = 1 + static_cast<int>(rng.below(30));
      const Labels hat = oracle::random_labels(n, k, rng);
      const Labels star = oracle::random_labels(n, k, rng);
      const Misrate m = misrate(hat, star, k);
      CHECK(m.mismatches == oracle::brute_force_mismatches(hat, star, k));
      int miss = 0;
      for (int i = 0; i < n; ++i)
        miss += hat[static_cast<std::size_t>(i)] != m.perm[static_cast<std::size_t>(star[static_cast<std::size_t>(i)])];
      CHECK(miss == m.mismatches);
    }
  }

  TEST_CASE("misrate is relabeling invariant and at most 1 - 1/k under balance") {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(4));
      const int n = k * (1 + static_cast<int>(rng.below(6)));
      const Labels hat = oracle::random_balanced(n, k, rng);
      const Labels star = oracle::random_balanced(n, k, rng);
      std::vector<int> perm(static_cast<std::size_t>(k));
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(std::span<int>(perm));
      Labels relabeled = hat;
      for (int& l : relabeled) l = perm[static_cast<std::size_t>(l)];
      const double rate = misrate(hat, star, k).rate;
      CHECK(misrate(relabeled, star, k).rate == rate);
      CHECK(misrate(star, relabeled, k).rate == rate);
      CHECK(rate <= 1.0 - 1.0 / k + 1e-12);
    }
  }

  TEST_CASE("l1_error examples") {
    const SymMatrix star = cluster_matrix({0, 0, 1, 1});
    const L1Error zero = l1_error(star, star);
    CHECK(zero.error == 0.0);
    CHECK(zero.ratio == 0.0);
    SymMatrix flipped = star;
    flipped.set(0, 1, 0.0);
    const L1Error e = l1_error(flipped, star);
    CHECK(e.error == 2.0);
    CHECK(e.ratio == doctest::Approx(2.0 * 2 / 16.0));
  }

  TEST_CASE("l1_error matches a double loop on fractional input") {
    Rng rng(7);
    const Labels labels = oracle::random_balanced(10, 2, rng);
    const SymMatrix star = cluster_matrix(labels);
    Eigen::MatrixXd y(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j <= i; ++j) y(i, j) = y(j, i) = rng.uniform() * 1.4 - 0.2;
    double err = 0.0, mass = 0.0;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        err += std::abs(y(i, j) - star(i, j));
        mass += std::abs(star(i, j));
      }
    const L1Error e = l1_error(SymMatrix(y), star);
    CHECK(e.error == doctest::Approx(err).epsilon(1e-14));
    CHECK(e.ratio == doctest::Approx(err / mass).epsilon(1e-14));
  }

  TEST_CASE("l1_error is a metric on cluster matrices") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      const SymMatrix a = cluster_matrix(oracle::random_balanced(12, 3, rng));
      const SymMatrix b = cluster_matrix(oracle::random_balanced(12, 3, rng));
      const SymMatrix c = cluster_matrix(oracle::random_balanced(12, 3, rng));
      CHECK(l1_error(a, b).error == l1_error(b, a).error);
      CHECK(l1_error(a, c).error <= l1_error(a, b).error + l1_error(b, c).error);
      CHECK((l1_error(a, b).error == 0.0) == (a == b));
    }
  }

  TEST_CASE("center_error examples") {
    Eigen::MatrixXd mu(3, 2);
    mu << 0, 0, 4, 0, 0, 3;
    CenterError same = center_error(mu, mu);
    CHECK(same.perm_matched == 0.0);
    CHECK(same.nearest == 0.0);
    Eigen::MatrixXd reordered(3, 2);
    reordered << 0, 3, 0, 0, 4, 0;
    same = center_error(reordered, mu);
    CHECK(same.perm_matched == 0.0);
    CHECK(same.nearest == 0.0);

    Eigen::MatrixXd one(2, 1), hat(2, 1);
    one << 0, 10;
    hat << 0.5, 9;
    const CenterError e = center_error(hat, one);
    CHECK(e.nearest == doctest::Approx(1.0));
    CHECK(e.perm_matched == doctest::Approx(1.0));

    // Both estimates near one center: the nearest match ignores the other.
    hat << 0.1, -0.2;
    const CenterError collapsed = center_error(hat, one);
    CHECK(collapsed.nearest == doctest::Approx(0.2));
    CHECK(collapsed.perm_matched == doctest::Approx(9.9));
  }
}
