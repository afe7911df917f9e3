#include "sgmm/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "sgmm/error.hpp"
#include "sgmm/rng.hpp"

namespace sgmm {
namespace {

constexpr Eigen::Index kPartialMinOrder = 500;
constexpr Eigen::Index kPartialMaxFraction = 32;  // partial path while positive * 32 <= n
constexpr Eigen::Index kMinBlock = 8;
constexpr Eigen::Index kMaxBlocks = 12;
constexpr Eigen::Index kMinKrylovDim = 256;
constexpr double kRitzTol = 1e-8;
constexpr std::uint64_t kStartSeed = 0x6b727976ULL;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

void require_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw InputError(std::string(what) + ": matrix is not square");
}

void copy_lower_to_upper(Eigen::MatrixXd& m) {
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
}

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double v = vectors(r, c);
      if (v != 0.0) {
        if (v < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

}  // namespace

SymMatrix::SymMatrix(Eigen::Index n) : m_(Eigen::MatrixXd::Zero(n, n)) {}

SymMatrix::SymMatrix(Eigen::MatrixXd m) {
  require_square(m, "SymMatrix");
  require_finite(m, "SymMatrix");
  const double scale = 1.0 + (m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0);
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InputError("SymMatrix: matrix is not symmetric");
  copy_lower_to_upper(m);
  m_ = std::move(m);
}

SymMatrix SymMatrix::symmetrized(const Eigen::MatrixXd& m) {
  require_square(m, "SymMatrix::symmetrized");
  require_finite(m, "SymMatrix::symmetrized");
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  copy_lower_to_upper(s);
  return SymMatrix(std::move(s), Trusted{});
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Identity(n, n), Trusted{});
}

SymMatrix SymMatrix::constant(Eigen::Index n, double value) {
  return SymMatrix(Eigen::MatrixXd::Constant(n, n, value), Trusted{});
}

void SymMatrix::set(Eigen::Index i, Eigen::Index j, double value) {
  if (!std::isfinite(value)) throw InputError("SymMatrix::set: non-finite value");
  m_(i, j) = value;
  m_(j, i) = value;
}

EigenPair sym_eig(const SymMatrix& m) {
  EigenPair out;
  if (m.order() == 0) return out;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.dense());
  if (solver.info() != Eigen::Success)
    throw NumericalError("sym_eig: tridiagonal QR did not converge within " +
                         std::to_string(30 * m.order()) + " iterations");
  // Ascending from the solver.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  normalize_signs(out.vectors);
  return out;
}

double min_eigenvalue(const SymMatrix& m) {
  if (m.order() == 0) throw InputError("min_eigenvalue: empty matrix");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("min_eigenvalue: tridiagonal QR did not converge within " +
                         std::to_string(30 * m.order()) + " iterations");
  return solver.eigenvalues()(0);
}

SymMatrix psd_project(const SymMatrix& m) {
  PsdProjector projector(m.order());
  Eigen::MatrixXd work = m.dense();
  projector.project(work);
  return SymMatrix::symmetrized(work);
}

PsdProjector::PsdProjector(Eigen::Index n)
    : n_(n),
      positive_(0),
      reduction_(std::max<Eigen::Index>(n, 1)),
      diag_(n),
      offdiag_(n),
      values_(n),
      tri_vectors_(n, n),
      support_(static_cast<std::size_t>(2 * std::max<Eigen::Index>(n, 1))) {}

void PsdProjector::project(Eigen::MatrixXd& m) {
  if (m.rows() != n_ || m.cols() != n_) throw InputError("PsdProjector: order mismatch");
  if (!m.allFinite()) throw NumericalError("PsdProjector: non-finite input");
  if (n_ == 0) return;
  if (n_ == 1) {
    positive_ = m(0, 0) > 0.0 ? 1 : 0;
    m(0, 0) = std::max(m(0, 0), 0.0);
    return;
  }

  const bool eligible = !exact_only_ && have_basis_ && n_ >= kPartialMinOrder &&
                        positive_ * kPartialMaxFraction <= n_;
  if (eligible && cooldown_ == 0) {
    if (project_partial(m)) {
      failures_ = 0;
      ++partial_calls_;
      return;
    }
    failures_ = std::min(failures_ + 1, 6);
    cooldown_ = 1 << failures_;
  }
  if (cooldown_ > 0) --cooldown_;
  project_exact(m);
}

bool PsdProjector::project_partial(Eigen::MatrixXd& m) {
  const Eigen::Index p = basis_.cols();
  const Eigen::Index block = std::max<Eigen::Index>(kMinBlock, p + p / 2 + 4);
  const Eigen::Index max_dim = std::min<Eigen::Index>(n_ / 2, std::max(kMaxBlocks * block, kMinKrylovDim));
  if (2 * block > max_dim) return false;
  if (krylov_.rows() != n_ || krylov_.cols() < max_dim) {
    krylov_.resize(n_, max_dim);
    image_.resize(n_, max_dim);
  }

  Eigen::MatrixXd w(n_, block);
  w.leftCols(p) = basis_;
  Rng rng(Rng::mix(kStartSeed + attempts_++));
  for (Eigen::Index c = p; c < block; ++c)
    for (Eigen::Index i = 0; i < n_; ++i) w(i, c) = rng.normal();

  Eigen::Index dim = 0;
  for (;;) {
    // Block Gram-Schmidt against the basis, done twice for orthogonality to
    // working precision; Householder QR orthonormalizes within the block.
    for (int pass = 0; pass < 2; ++pass) {
      if (dim > 0) w.noalias() -= krylov_.leftCols(dim) * (krylov_.leftCols(dim).transpose() * w);
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
      w = qr.householderQ() * Eigen::MatrixXd::Identity(n_, block);
    }
    krylov_.middleCols(dim, block) = w;
    image_.middleCols(dim, block).noalias() = m * w;
    dim += block;

    // Rayleigh-Ritz on every second block.
    if (dim % (2 * block) == 0) {
      Eigen::MatrixXd t = krylov_.leftCols(dim).transpose() * image_.leftCols(dim);
      t = 0.5 * (t + t.transpose()).eval();
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(t);
      if (ritz.info() != Eigen::Success) return false;
      const Eigen::VectorXd& theta = ritz.eigenvalues();  // ascending
      const double scale = std::max(std::abs(theta(0)), std::abs(theta(dim - 1)));
      Eigen::Index q = 0;
      while (q < dim && theta(dim - 1 - q) > 0.0) ++q;
      if (scale > 0.0 && q < block) {
        const Eigen::MatrixXd y = ritz.eigenvectors().rightCols(q);
        const Eigen::VectorXd top = theta.tail(q);
        Eigen::MatrixXd vectors = krylov_.leftCols(dim) * y;
        const Eigen::MatrixXd residual =
            image_.leftCols(dim) * y - vectors * top.asDiagonal();
        if (q > 0 && residual.colwise().norm().maxCoeff() <= kRitzTol * scale) {
          basis_ = vectors;
          positive_ = q;
          m.setZero();
          if (q > 0) {
            for (Eigen::Index c = 0; c < q; ++c) vectors.col(c) *= std::sqrt(top(c));
            m.selfadjointView<Eigen::Lower>().rankUpdate(vectors, 1.0);
          }
          copy_lower_to_upper(m);
          return true;
        }
      }
    }
    if (dim + block > max_dim) return false;
    w = image_.middleCols(dim - block, block);
  }
}

void PsdProjector::project_exact(Eigen::MatrixXd& m) {
  reduction_.compute(m);
  diag_ = reduction_.diagonal();
  offdiag_.head(n_ - 1) = reduction_.subDiagonal();
  offdiag_(n_ - 1) = 0.0;

  // Gershgorin bound on the tridiagonal form, padded so that (-b, b] strictly
  // contains the spectrum.
  double bound = 0.0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double left = i > 0 ? std::abs(offdiag_(i - 1)) : 0.0;
    bound = std::max(bound, std::abs(diag_(i)) + std::abs(offdiag_(i)) + left);
  }
  bound += 1.0;

  const bool keep_positive_side = positive_ <= n_ / 2;
  const double lo = keep_positive_side ? 0.0 : -bound;
  const double hi = keep_positive_side ? bound : 0.0;

  const auto n = static_cast<lapack_int>(n_);
  lapack_int found = 0;
  lapack_logical try_relative = 1;
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'V', n, diag_.data(), offdiag_.data(),
                                         lo, hi, 0, 0, &found, values_.data(), tri_vectors_.data(),
                                         n, n, support_.data(), &try_relative);
  if (info < 0) throw InputError("PsdProjector: invalid LAPACK argument " + std::to_string(-info));
  if (info > 0) {
    // MRRR can fail on pathological clusters; implicit QR on the same
    // tridiagonal form always finishes.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qr;
    qr.computeFromTridiagonal(reduction_.diagonal(), reduction_.subDiagonal(),
                              Eigen::ComputeEigenvectors);
    if (qr.info() != Eigen::Success)
      throw NumericalError("PsdProjector: tridiagonal eigensolver did not converge within " +
                           std::to_string(30 * n_) + " iterations");
    const Eigen::VectorXd& all = qr.eigenvalues();  // ascending
    Eigen::Index first = 0;
    while (first < n_ && all(first) <= lo) ++first;
    Eigen::Index last = first;
    while (last < n_ && all(last) <= hi) ++last;
    found = static_cast<lapack_int>(last - first);
    values_.head(found) = all.segment(first, found);
    tri_vectors_.leftCols(found) = qr.eigenvectors().middleCols(first, found);
  }

  // Eigenvalues in (lo, hi]: on the positive side zero is excluded, on the
  // negative side zeros are included and contribute nothing.
  Eigen::MatrixXd scaled = reduction_.matrixQ() * tri_vectors_.leftCols(found);
  if (keep_positive_side) basis_ = scaled;
  have_basis_ = keep_positive_side;
  for (lapack_int c = 0; c < found; ++c) scaled.col(c) *= std::sqrt(std::abs(values_(c)));

  if (keep_positive_side) {
    positive_ = found;
    m.setZero();
  } else {
    positive_ = n_ - found;
  }
  // Positive side: V diag(values) V^T. Negative side: m - V diag(values) V^T
  // with values <= 0. Both are a +1 rank update.
  if (found > 0) m.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0);
  copy_lower_to_upper(m);
}

SymMatrix pairwise_sq_dists(const Points& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n < 2) throw InputError("pairwise_sq_dists: need at least two points");
  if (!points.allFinite()) throw InputError("pairwise_sq_dists: non-finite coordinate");
  // Row access on a column-major matrix is strided; work on the transpose.
  const Eigen::MatrixXd cols = points.transpose();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* pj = cols.col(j).data();
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double* pi = cols.col(i).data();
      double acc = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = pi[c] - pj[c];
        acc += diff * diff;
      }
      a(i, j) = acc;
      a(j, i) = acc;
    }
  }
  return SymMatrix(std::move(a));
}

SymMatrix pairwise_sq_dists(std::span<const Eigen::VectorXd> points) {
  if (points.size() < 2) throw InputError("pairwise_sq_dists: need at least two points");
  const Eigen::Index d = points.front().size();
  Points stacked(static_cast<Eigen::Index>(points.size()), d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d)
      throw InputError("pairwise_sq_dists: point " + std::to_string(i) + " has dimension " +
                       std::to_string(points[i].size()) + ", expected " + std::to_string(d));
    stacked.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  }
  return pairwise_sq_dists(stacked);
}

double l1_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().sum(); }

}  // namespace sgmm
