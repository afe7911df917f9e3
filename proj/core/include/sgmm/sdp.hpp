#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

#include "sgmm/linalg.hpp"

namespace sgmm {

enum class Splitting {
  /// X in {Y 1 = (n/k) 1, Y psd} (carries the objective), Z in {diag(Y) = 1,
  /// Y >= 0}; both projections are closed form.
  kTwoBlock,
  /// Consensus over the affine, psd and nonnegative blocks, averaged into Z.
  kConsensus,
};

std::string to_string(Splitting splitting);
Splitting parse_splitting(const std::string& name);

struct SolverConfig {
  Splitting splitting = Splitting::kTwoBlock;
  /// Initial penalty; defaults to ||A||_F / n (1 when A = 0).
  std::optional<double> rho;
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  int max_iter = 5000;
  /// Residual-balancing rho updates (x2 or /2 when the residuals differ by
  /// more than 10x, at most every 50 iterations). The primal residual is
  /// measured relative to the iterates and the dual one relative to rho U.
  bool adaptive_rho = true;
  /// Every PSD projection by full eigendecomposition; otherwise low-rank
  /// projections may use the partial Krylov path of PsdProjector.
  bool exact_projection = false;
  /// Progress callback cadence in iterations; 0 disables.
  int log_every = 0;

  void validate() const;
};

struct FeasibilityReport {
  double row_sum_resid = 0.0;  // max_i |(Y 1)_i - n/k| / (n/k)
  double diag_resid = 0.0;     // max_i |Y_ii - 1|
  double neg_entry = 0.0;      // max(0, -min_ij Y_ij)
  double min_eig = 0.0;        // smallest eigenvalue of Y
};

struct SolverProgress {
  int iteration;
  double primal_resid;
  double dual_resid;
  double rho;
  double objective;
};

struct SdpSolution {
  SymMatrix Y;
  double objective = 0.0;
  int iterations = 0;
  FeasibilityReport residuals;
  bool converged = false;
  double primal_resid = 0.0;  // max_i ||Y_i - Z||_F at the returned iterate
  double dual_resid = 0.0;    // rho ||Z - Z_prev||_F at the returned iterate
  double rho = 0.0;           // penalty in force at termination
};

/// Frobenius-nearest symmetric matrix with every row sum n/k and unit
/// diagonal. Closed form: Y = M - lambda 1^T - 1 lambda^T - Diag(nu).
/// Throws InputError if n < 4, k < 2 or n % k != 0.
SymMatrix affine_project(const SymMatrix& m, int k);

/// Frobenius-nearest matrix with every row sum n/k that is positive
/// semidefinite: (1/k) J + psd(P M P) with P = I - J/n. Same preconditions as
/// affine_project.
SymMatrix row_sum_psd_project(const SymMatrix& m, int k);

/// Measurement only. k must divide the order of Y.
FeasibilityReport feasibility(const SymMatrix& y, int k);

/// Minimizes <Y, A> over { Y 1 = (n/k) 1, Y psd, diag(Y) = 1, Y >= 0 } by ADMM
/// with exact block projections (see Splitting). Converged when the largest
/// block disagreement max_i ||Y_i - Z||_F <= tol_primal (1 + ||Z||_F) and
/// rho ||Z - Z_prev||_F <= tol_dual (1 + ||Z||_F).
///
/// Returns Z. If max_iter is reached first, returns the iterate with the
/// smallest normalized residual and converged = false. Throws NumericalError
/// if an iterate becomes non-finite.
SdpSolution solve_sdp(const SymMatrix& a, int k, const SolverConfig& config = {},
                      const std::function<void(const SolverProgress&)>& on_progress = {});

/// 1 where Y_ij >= 0.5, else 0. Ties round up.
SymMatrix elementwise_round(const SymMatrix& y);

/// Trace inner product.
double inner(const SymMatrix& a, const SymMatrix& b);

}  // namespace sgmm
