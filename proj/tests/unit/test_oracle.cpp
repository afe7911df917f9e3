#include <doctest.h>

#include "oracles.hpp"
#include "sgmm/error.hpp"
#include "sgmm/oracle.hpp"

using namespace sgmm;

namespace {

// Random small instance: centers and points uniform in a box, labels balanced.
OracleInstance random_instance(int n, int k, int d, Rng& rng) {
  Eigen::MatrixXd centers(k, d);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < d; ++c) centers(a, c) = 4.0 * rng.uniform();
  const Labels labels = oracle::random_balanced(n, k, rng);
  Points points(n, d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c)
      points(i, c) = centers(labels[static_cast<std::size_t>(i)], c) + 0.6 * rng.normal();
  return build_instance(points, centers, labels);
}

// Direct definition: the largest number of relabeled points over all k^n
// assignments whose eta does not exceed that of the truth.
int enumerate_worst(const OracleInstance& inst) {
  const double base = eta(inst, inst.labels);
  int worst = 0;
  oracle::for_each_labeling(inst.n(), inst.k(), [&](const Labels& f) {
    if (eta(inst, f) > base) return;
    int changed = 0;
    for (std::size_t i = 0; i < f.size(); ++i) changed += f[i] != inst.labels[i];
    worst = std::max(worst, changed);
  });
  return worst;
}

}  // namespace

TEST_SUITE("oracle-ip") {
  TEST_CASE("one-dimensional margin example") {
    Points p(2, 1);
    p << 0.4, 2.0;
    Eigen::MatrixXd centers(2, 1);
    centers << 0.0, 2.0;
    const OracleInstance inst = build_instance(p, centers, {0, 1});
    CHECK(inst.points_bar(0, 0) == doctest::Approx(1.6));
    CHECK(inst.delta(0, 0) == 0.0);
    CHECK(inst.delta(0, 1) == doctest::Approx(-2.4));
    CHECK(oracle_assign(inst)[0] == 1);
  }

  TEST_CASE("zero noise: margins are squared separations and nothing moves") {
    Eigen::MatrixXd centers(3, 2);
    centers << 0, 0, 3, 0, 0, 4;
    const Labels labels = {0, 1, 2, 2, 1, 0};
    Points p(6, 2);
    for (int i = 0; i < 6; ++i) p.row(i) = centers.row(labels[static_cast<std::size_t>(i)]);
    const OracleInstance inst = build_instance(p, centers, labels);
    for (int j = 0; j < 6; ++j)
      for (int a = 0; a < 3; ++a) {
        const double sep = (centers.row(a) - centers.row(labels[static_cast<std::size_t>(j)])).squaredNorm();
        CHECK(inst.delta(j, a) == doctest::Approx(sep));
      }
    CHECK(oracle_assign(inst) == labels);
    const IpError e = ip_worst_error(inst);
    CHECK(e.count == 0);
    CHECK(e.ratio == 0.0);
    CHECK(ip_worst_error_bruteforce(inst) == 0);
  }

  TEST_CASE("hand-built instance with one profitable flip") {
    // Point 0 gains 2.4 by moving; every other point loses at least 3.
    Eigen::MatrixXd centers(2, 1);
    centers << 0.0, 2.0;
    Points p(4, 1);
    p << 0.4, 0.0, 2.0, 2.0;
    const OracleInstance inst = build_instance(p, centers, {0, 0, 1, 1});
    CHECK(ip_worst_error(inst).count == 1);
    CHECK(ip_worst_error(inst).ratio == doctest::Approx(0.25));
    CHECK(ip_worst_error_bruteforce(inst) == 1);
  }

  TEST_CASE("oracle_assign minimizes eta over all assignments") {
    Rng rng(101);
    for (int trial = 0; trial < 30; ++trial) {
      const int k = 2 + trial % 2;
      const int n = k == 2 ? 8 : 6;
      const OracleInstance inst = random_instance(n, k, 2, rng);
      double best = std::numeric_limits<double>::infinity();
      oracle::for_each_labeling(n, k, [&](const Labels& f) { best = std::min(best, eta(inst, f)); });
      CHECK(eta(inst, oracle_assign(inst)) == doctest::Approx(best).epsilon(1e-12));
    }
  }

  TEST_CASE("greedy worst error equals enumeration on 100 random instances") {
    Rng rng(202);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 2 + trial % 2;
      const int n = k == 2 ? 2 * (2 + trial % 3) : 6;
      const OracleInstance inst = random_instance(n, k, 1 + trial % 3, rng);
      const int expected = enumerate_worst(inst);
      CHECK(ip_worst_error(inst).count == expected);
      CHECK(ip_worst_error_bruteforce(inst) == expected);
    }
  }

  TEST_CASE("oracle assignment moves no more points than the worst case") {
    Rng rng(303);
    for (int trial = 0; trial < 50; ++trial) {
      const OracleInstance inst = random_instance(8, 2, 2, rng);
      const Labels f = oracle_assign(inst);
      int moved = 0;
      for (std::size_t i = 0; i < f.size(); ++i) moved += f[i] != inst.labels[i];
      CHECK(moved <= ip_worst_error(inst).count);
    }
  }

  TEST_CASE("worst error grows with the noise scale") {
    Rng rng(404);
    Eigen::MatrixXd centers(2, 3);
    centers << 0, 0, 0, 1, 1, 1;
    const int n = 200;
    const Labels labels = oracle::random_balanced(n, 2, rng);
    Eigen::MatrixXd g(n, 3);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) g(i, c) = rng.normal();
    int previous = -1;
    for (double scale : {0.01, 0.1, 0.3, 1.0, 3.0}) {
      Points p(n, 3);
      for (int i = 0; i < n; ++i) p.row(i) = centers.row(labels[static_cast<std::size_t>(i)]) + scale * g.row(i);
      const int count = ip_worst_error(build_instance(p, centers, labels)).count;
      CHECK(count >= previous);
      previous = count;
    }
    CHECK(previous > 0);
  }

  TEST_CASE("input errors") {
    Eigen::MatrixXd centers(2, 1);
    centers << 0.0, 1.0;
    CHECK_THROWS_AS(build_instance(Points(4, 1), centers, {0, 1}), InputError);
    Dataset no_spec;
    no_spec.points = Points::Zero(4, 1);
    no_spec.labels = {0, 0, 1, 1};
    CHECK_THROWS_AS(build_instance(no_spec), InputError);
    const OracleInstance big = build_instance(Points::Zero(40, 1), centers, Labels(40, 0));
    CHECK_THROWS_AS(ip_worst_error_bruteforce(big), InputError);
  }
}
