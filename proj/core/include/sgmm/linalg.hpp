#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cstdint>
#include <span>
#include <vector>

namespace sgmm {

/// n points in R^d, one per row.
using Points = Eigen::MatrixXd;

/// Dense symmetric matrix. Construction from a general matrix checks
/// squareness, finiteness and symmetry, then stores the exact symmetric part so
/// that (i, j) and (j, i) are bitwise equal.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Zero matrix of order n.
  explicit SymMatrix(Eigen::Index n);

  /// Throws InputError unless m is square, finite and symmetric to within
  /// 1e-12 * (1 + max|m_ij|).
  explicit SymMatrix(Eigen::MatrixXd m);

  /// (m + m^T) / 2 without the symmetry check; still rejects non-finite input.
  static SymMatrix symmetrized(const Eigen::MatrixXd& m);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix constant(Eigen::Index n, double value);

  Eigen::Index order() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Eigen::MatrixXd& dense() const noexcept { return m_; }

  /// Writes both (i, j) and (j, i).
  void set(Eigen::Index i, Eigen::Index j, double value);

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  struct Trusted {};
  SymMatrix(Eigen::MatrixXd m, Trusted) : m_(std::move(m)) {}

  Eigen::MatrixXd m_;
};

/// Spectral decomposition M = V diag(values) V^T with values sorted descending.
/// The first nonzero component of every eigenvector is positive.
struct EigenPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Full symmetric eigendecomposition, deterministic for identical input.
/// Throws NumericalError if the tridiagonal QR iteration exceeds its budget of
/// 30 n sweeps.
EigenPair sym_eig(const SymMatrix& m);

/// Smallest eigenvalue only.
double min_eigenvalue(const SymMatrix& m);

/// Frobenius-nearest positive semidefinite matrix: V diag(max(values, 0)) V^T.
SymMatrix psd_project(const SymMatrix& m);

/// Reusable PSD projection for iterative solvers. Two paths:
///   exact:   Householder tridiagonalization, then MRRR for the eigenpairs on
///            one side of zero (the side with fewer pairs last time);
///   partial: block Krylov with Rayleigh-Ritz, warm-started from the previous
///            positive eigenvectors, used when few eigenvalues were positive
///            last time. Accepted only if at least one Ritz value is
///            positive and every positive pair has residual
///            ||M v - theta v|| <= 1e-8 max|theta|; otherwise the exact
///            path runs and partial tries back off.
/// Eigenvalues missing from the Krylov space cannot be ruled out, so the
/// partial path is a heuristic; set_exact_only disables it.
/// The first call always takes the exact path. Random start vectors come
/// from a fixed seed, so a sequence of calls is deterministic.
class PsdProjector {
 public:
  explicit PsdProjector(Eigen::Index n);

  /// Overwrites m (symmetric, finite) with its PSD projection.
  void project(Eigen::MatrixXd& m);

  /// Number of positive eigenvalues seen in the most recent call.
  Eigen::Index last_positive_count() const noexcept { return positive_; }

  /// Calls answered by the partial path so far.
  long long partial_calls() const noexcept { return partial_calls_; }

  /// Disables the partial path; every call is exact.
  void set_exact_only(bool exact_only) noexcept { exact_only_ = exact_only; }

 private:
  void project_exact(Eigen::MatrixXd& m);
  bool project_partial(Eigen::MatrixXd& m);

  Eigen::Index n_;
  Eigen::Index positive_;
  Eigen::Tridiagonalization<Eigen::MatrixXd> reduction_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd offdiag_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd tri_vectors_;
  std::vector<int> support_;

  bool exact_only_ = false;
  bool have_basis_ = false;
  Eigen::MatrixXd basis_;    // positive eigenvectors of the last call
  Eigen::MatrixXd krylov_;   // orthonormal Krylov basis
  Eigen::MatrixXd image_;    // m * krylov_
  std::uint64_t attempts_ = 0;  // partial tries so far; seeds the start block
  int cooldown_ = 0;         // exact calls left before the next partial try
  int failures_ = 0;         // consecutive partial failures
  long long partial_calls_ = 0;
};

/// A_ij = ||p_i - p_j||^2 for the rows of points, accumulated coordinate by
/// coordinate in index order. Requires at least two points.
SymMatrix pairwise_sq_dists(const Points& points);

/// Same, for a list of vectors; throws InputError on a dimension mismatch.
SymMatrix pairwise_sq_dists(std::span<const Eigen::VectorXd> points);

/// Entrywise sum of |m_ij|.
double l1_norm(const Eigen::MatrixXd& m);

}  // namespace sgmm
