#include <doctest.h>

#include "oracles.hpp"
#include "sgmm/error.hpp"
#include "sgmm/linalg.hpp"

using namespace sgmm;

namespace {

double recon_error(const EigenPair& e, const Eigen::MatrixXd& m) {
  return (e.vectors * e.values.asDiagonal() * e.vectors.transpose() - m).norm();
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("SymMatrix rejects asymmetric and non-finite input") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 3, 4;
    CHECK_THROWS_AS(SymMatrix{m}, InputError);
    m << 1, 2, 2, std::nan("");
    CHECK_THROWS_AS(SymMatrix{m}, InputError);
    CHECK_THROWS_AS(SymMatrix{Eigen::MatrixXd(2, 3)}, InputError);
  }

  TEST_CASE("sym_eig of identity and diagonal matrices") {
    const EigenPair id = sym_eig(SymMatrix::identity(3));
    CHECK((id.values - Eigen::Vector3d::Ones()).norm() < 1e-14);
    CHECK((id.vectors.transpose() * id.vectors - Eigen::Matrix3d::Identity()).norm() < 1e-12);

    Eigen::MatrixXd d = Eigen::Vector3d(3, 1, -2).asDiagonal();
    const EigenPair e = sym_eig(SymMatrix(d));
    CHECK(e.values(0) == doctest::Approx(3.0));
    CHECK(e.values(1) == doctest::Approx(1.0));
    CHECK(e.values(2) == doctest::Approx(-2.0));
    // Sign convention makes the axes come out positive.
    CHECK((e.vectors - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  }

  TEST_CASE("sym_eig values match unshifted QR iteration on random 8x8") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::MatrixXd m = oracle::random_symmetric(8, rng);
      const EigenPair e = sym_eig(SymMatrix(m));
      const Eigen::VectorXd ref = oracle::qr_iteration_eigenvalues(m);
      CHECK((e.values - ref).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("sym_eig reconstruction, orthonormality, order and signs") {
    Rng rng(3);
    for (int n : {1, 2, 5, 30, 120}) {
      const Eigen::MatrixXd m = oracle::random_symmetric(n, rng, 3.0);
      const EigenPair e = sym_eig(SymMatrix(m));
      CHECK(recon_error(e, m) <= 1e-8 * (1.0 + m.norm()));
      CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-8);
      for (int i = 1; i < n; ++i) CHECK(e.values(i - 1) >= e.values(i));
      for (int c = 0; c < n; ++c) {
        int first = 0;
        while (e.vectors(first, c) == 0.0) ++first;
        CHECK(e.vectors(first, c) > 0.0);
      }
      const EigenPair again = sym_eig(SymMatrix(m));
      CHECK(again.values == e.values);
      CHECK(again.vectors == e.vectors);
    }
  }

  TEST_CASE("min_eigenvalue agrees with sym_eig") {
    Rng rng(5);
    const Eigen::MatrixXd m = oracle::random_symmetric(40, rng);
    CHECK(min_eigenvalue(SymMatrix(m)) == doctest::Approx(sym_eig(SymMatrix(m)).values(39)).epsilon(1e-10));
  }

  TEST_CASE("psd_project basic cases") {
    Eigen::MatrixXd d = Eigen::Vector2d(2, -3).asDiagonal();
    const SymMatrix p = psd_project(SymMatrix(d));
    CHECK((p.dense() - Eigen::Matrix2d(Eigen::Vector2d(2, 0).asDiagonal())).norm() < 1e-12);

    Rng rng(9);
    const Eigen::MatrixXd b = oracle::random_symmetric(10, rng);
    const Eigen::MatrixXd psd = b * b.transpose();
    CHECK((psd_project(SymMatrix::symmetrized(psd)).dense() - psd).norm() < 1e-8 * (1.0 + psd.norm()));
  }

  TEST_CASE("psd_project is idempotent and lands in the cone") {
    Rng rng(11);
    for (int n : {6, 50, 200}) {
      const SymMatrix m(oracle::random_symmetric(n, rng));
      const SymMatrix p = psd_project(m);
      CHECK(min_eigenvalue(p) >= -1e-9 * n);
      CHECK((psd_project(p).dense() - p.dense()).norm() <= 1e-8 * (1.0 + p.dense().norm()));
    }
  }

  TEST_CASE("psd_project beats 10^4 random PSD candidates on a 6x6") {
    Rng rng(21);
    const Eigen::MatrixXd m = oracle::random_symmetric(6, rng);
    const double best = (psd_project(SymMatrix(m)).dense() - m).norm();
    for (int trial = 0; trial < 10000; ++trial) {
      // Candidates: random Gram matrices of varying rank and scale, plus
      // perturbations of the projection itself.
      const int rank = 1 + static_cast<int>(rng.below(6));
      Eigen::MatrixXd g(6, rank);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < rank; ++j) g(i, j) = rng.normal() * (trial % 2 ? 0.3 : 1.0);
      Eigen::MatrixXd cand = g * g.transpose();
      if (trial % 3 == 0) {
        const Eigen::MatrixXd proj = psd_project(SymMatrix(m)).dense();
        cand = proj + 1e-3 * cand;
      }
      CHECK((cand - m).norm() >= best - 1e-12);
    }
  }

  TEST_CASE("PsdProjector partial path agrees with the exact projection") {
    // A slowly drifting sequence of low-rank-positive matrices, the regime in
    // which the partial path engages.
    Rng rng(8);
    const int n = 600;
    Eigen::MatrixXd low(n, 3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) low(i, j) = rng.normal();
    Eigen::MatrixXd neg = oracle::random_symmetric(n, rng, 0.05);
    neg = -(neg * neg.transpose()) / n - 0.5 * Eigen::MatrixXd::Identity(n, n);
    PsdProjector fast(n), exact(n);
    exact.set_exact_only(true);
    for (int step = 0; step < 8; ++step) {
      Eigen::MatrixXd m = low * low.transpose() + neg;
      m += 1e-3 * step * oracle::random_symmetric(n, rng) / std::sqrt(n);
      m = 0.5 * (m + m.transpose()).eval();
      Eigen::MatrixXd a = m, b = m;
      fast.project(a);
      exact.project(b);
      CHECK((a - b).norm() <= 1e-6 * (1.0 + b.norm()));
      CHECK(fast.last_positive_count() == exact.last_positive_count());
    }
    CHECK(fast.partial_calls() > 0);
    CHECK(exact.partial_calls() == 0);
  }

  TEST_CASE("pairwise_sq_dists") {
    Points two(2, 2);
    two << 0, 0, 3, 4;
    CHECK(pairwise_sq_dists(two)(0, 1) == 25.0);
    Points same(2, 3);
    same << 1, 2, 3, 1, 2, 3;
    CHECK(pairwise_sq_dists(same).dense().isZero(0.0));

    Rng rng(4);
    Points p(5, 3);
    for (int i = 0; i < 5; ++i)
      for (int c = 0; c < 3; ++c) p(i, c) = rng.normal();
    CHECK((pairwise_sq_dists(p).dense() - oracle::naive_sq_dists(p)).cwiseAbs().maxCoeff() <= 1e-13);

    std::vector<Eigen::VectorXd> mixed = {Eigen::Vector2d(0, 0), Eigen::Vector3d(0, 0, 0)};
    CHECK_THROWS_AS(pairwise_sq_dists(std::span<const Eigen::VectorXd>(mixed)), InputError);
    CHECK_THROWS_AS(pairwise_sq_dists(Points(1, 2)), InputError);
  }

  TEST_CASE("pairwise_sq_dists: relaxed triangle inequality") {
    Rng rng(6);
    Points p(12, 4);
    for (int i = 0; i < 12; ++i)
      for (int c = 0; c < 4; ++c) p(i, c) = 5.0 * rng.normal();
    const Eigen::MatrixXd a = pairwise_sq_dists(p).dense();
    for (int i = 0; i < 12; ++i) {
      CHECK(a(i, i) == 0.0);
      for (int j = 0; j < 12; ++j)
        for (int k = 0; k < 12; ++k) CHECK(a(i, j) <= 2 * a(i, k) + 2 * a(k, j) + 1e-12);
    }
  }
}
