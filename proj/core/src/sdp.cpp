#include "sgmm/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgmm/error.hpp"

namespace sgmm {
namespace {

void require_shape(Eigen::Index n, int k, const char* context) {
  if (k < 2) throw InputError(std::string(context) + ": need k >= 2, got " + std::to_string(k));
  if (n < 4) throw InputError(std::string(context) + ": need n >= 4, got " + std::to_string(n));
  if (n % k != 0)
    throw InputError(std::string(context) + ": n = " + std::to_string(n) +
                     " is not a multiple of k = " + std::to_string(k));
}

// Stationarity gives Y = M - lambda 1^T - 1 lambda^T - Diag(nu). The unit
// diagonal fixes nu_i = M_ii - 2 lambda_i - 1; substituting into the row-sum
// constraint leaves (n - 2) lambda_i + sum(lambda) = b_i with
// b_i = (M 1)_i - M_ii + 1 - n/k, which sums to sum(lambda) = sum(b) / (2n - 2).
void affine_project_inplace(Eigen::MatrixXd& m, int k) {
  const Eigen::Index n = m.rows();
  const double target = static_cast<double>(n) / k;
  Eigen::VectorXd b = m.colwise().sum().transpose();  // symmetric: column sums are row sums
  b -= m.diagonal();
  b.array() += 1.0 - target;
  const double total = b.sum() / (2.0 * static_cast<double>(n) - 2.0);
  const Eigen::VectorXd lambda = (b.array() - total) / (static_cast<double>(n) - 2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    double* col = m.col(j).data();
    const double lj = lambda(j);
    for (Eigen::Index i = 0; i < n; ++i) col[i] -= lambda(i) + lj;
    col[j] = 1.0;
  }
}

// Removes the 1-direction: P M P with P = I - J/n.
void center_inplace(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  const Eigen::VectorXd r = m.rowwise().sum() / static_cast<double>(n);
  const double mean = r.mean();
  for (Eigen::Index j = 0; j < n; ++j) {
    double* col = m.col(j).data();
    const double rj = r(j) - mean;
    for (Eigen::Index i = 0; i < n; ++i) col[i] -= r(i) + rj;
  }
}

// Feasible points split as (1/k) J + X with X 1 = 0, and the Frobenius
// distance separates across the two orthogonal pieces.
void row_sum_psd_project_inplace(Eigen::MatrixXd& m, int k, PsdProjector& projector) {
  center_inplace(m);
  projector.project(m);
  m.array() += 1.0 / k;
}

void clip_unit_diag_inplace(Eigen::MatrixXd& m) {
  m = m.cwiseMax(0.0);
  m.diagonal().setOnes();
}

double normalized_score(double primal, double dual, double scale, const SolverConfig& config) {
  return std::max(primal / (config.tol_primal * scale), dual / (config.tol_dual * scale));
}

// Shared bookkeeping: residual tests, best iterate, progress, rho balancing.
class Monitor {
 public:
  Monitor(const SolverConfig& config, const Eigen::MatrixXd& cost,
          const std::function<void(const SolverProgress&)>& on_progress, double rho)
      : config_(config), cost_(cost), on_progress_(on_progress), rho_(rho) {}

  double rho() const { return rho_; }

  // Returns true once both residuals meet their tolerances.
  bool record(int iteration, const Eigen::MatrixXd& z, double primal, double dual) {
    if (!z.allFinite())
      throw NumericalError("solve_sdp: non-finite iterate at iteration " + std::to_string(iteration));
    primal_ = primal;
    dual_ = dual;
    const double scale = 1.0 + z.norm();
    const double score = normalized_score(primal, dual, scale, config_);
    if (score < best_score_) {
      best_score_ = score;
      best_ = z;
      best_primal_ = primal;
      best_dual_ = dual;
    }
    if (config_.log_every > 0 && on_progress_ && iteration % config_.log_every == 0)
      on_progress_({iteration, primal, dual, rho_, cost_.cwiseProduct(z).sum()});
    return primal <= config_.tol_primal * scale && dual <= config_.tol_dual * scale;
  }

  // Factor applied to rho (1 when unchanged); scaled duals must be divided by it.
  // Each residual is taken relative to the size of its own variable: the
  // primal one against the iterates, the dual one against the unscaled dual
  // rho * U. Raw residuals live on different scales whenever ||A|| differs
  // from ||Y||, and balancing them drives rho far from its useful range.
  double rebalance(int iteration, double primal_scale, double dual_scale) {
    if (!config_.adaptive_rho || iteration - last_change_ < 50) return 1.0;
    if (!(primal_scale > 0.0) || !(dual_scale > 0.0)) return 1.0;
    const double primal = primal_ / primal_scale;
    const double dual = dual_ / dual_scale;
    double factor = 1.0;
    if (primal > 10.0 * dual) factor = 2.0;
    else if (dual > 10.0 * primal) factor = 0.5;
    if (factor != 1.0) {
      rho_ *= factor;
      last_change_ = iteration;
    }
    return factor;
  }

  void finish(SdpSolution& solution, const Eigen::MatrixXd& z, bool converged) const {
    solution.converged = converged;
    solution.rho = rho_;
    if (converged) {
      solution.Y = SymMatrix::symmetrized(z);
      solution.primal_resid = primal_;
      solution.dual_resid = dual_;
    } else {
      solution.Y = SymMatrix::symmetrized(best_);
      solution.primal_resid = best_primal_;
      solution.dual_resid = best_dual_;
    }
  }

 private:
  const SolverConfig& config_;
  const Eigen::MatrixXd& cost_;
  const std::function<void(const SolverProgress&)>& on_progress_;
  double rho_;
  int last_change_ = 0;
  double primal_ = 0.0, dual_ = 0.0;
  Eigen::MatrixXd best_;
  double best_score_ = std::numeric_limits<double>::infinity();
  double best_primal_ = 0.0, best_dual_ = 0.0;
};

// Returns the iteration count; z holds the final iterate.
int run_two_block(const Eigen::MatrixXd& cost, int k, const SolverConfig& config, Monitor& monitor,
                  Eigen::MatrixXd& z, bool& converged) {
  const Eigen::Index n = cost.rows();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd x(n, n), z_prev(n, n);
  Eigen::MatrixXd scaled_cost = cost / monitor.rho();
  PsdProjector projector(n);
  projector.set_exact_only(config.exact_projection);
  int iteration = 0;
  while (iteration < config.max_iter) {
    ++iteration;
    x.noalias() = z - u - scaled_cost;
    row_sum_psd_project_inplace(x, k, projector);
    z_prev.swap(z);
    z.noalias() = x + u;
    clip_unit_diag_inplace(z);
    u += x - z;

    const double primal = (x - z).norm();
    const double dual = monitor.rho() * (z - z_prev).norm();
    if (monitor.record(iteration, z, primal, dual)) {
      converged = true;
      break;
    }
    const double primal_scale = std::max(x.norm(), z.norm());
    if (const double factor = monitor.rebalance(iteration, primal_scale, monitor.rho() * u.norm()); factor != 1.0) {
      u /= factor;
      scaled_cost = cost / monitor.rho();
    }
  }
  return iteration;
}

int run_consensus(const Eigen::MatrixXd& cost, int k, const SolverConfig& config, Monitor& monitor,
                  Eigen::MatrixXd& z, bool& converged) {
  const Eigen::Index n = cost.rows();
  Eigen::MatrixXd u1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd u2 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd u3 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd y1(n, n), y2(n, n), y3(n, n), z_prev(n, n);
  Eigen::MatrixXd scaled_cost = cost / monitor.rho();
  PsdProjector projector(n);
  projector.set_exact_only(config.exact_projection);
  int iteration = 0;
  while (iteration < config.max_iter) {
    ++iteration;
    y1.noalias() = z - u1 - scaled_cost;
    affine_project_inplace(y1, k);
    y2.noalias() = z - u2;
    projector.project(y2);
    y3 = (z - u3).cwiseMax(0.0);

    z_prev.swap(z);
    z = (y1 + u1 + y2 + u2 + y3 + u3) / 3.0;
    u1 += y1 - z;
    u2 += y2 - z;
    u3 += y3 - z;

    const double primal = std::max({(y1 - z).norm(), (y2 - z).norm(), (y3 - z).norm()});
    const double dual = monitor.rho() * (z - z_prev).norm();
    if (monitor.record(iteration, z, primal, dual)) {
      converged = true;
      break;
    }
    const double primal_scale = std::max({y1.norm(), y2.norm(), y3.norm(), z.norm()});
    const double dual_scale = monitor.rho() * std::max({u1.norm(), u2.norm(), u3.norm()});
    if (const double factor = monitor.rebalance(iteration, primal_scale, dual_scale); factor != 1.0) {
      u1 /= factor;
      u2 /= factor;
      u3 /= factor;
      scaled_cost = cost / monitor.rho();
    }
  }
  return iteration;
}

}  // namespace

void SolverConfig::validate() const {
  if (rho && !(*rho > 0.0 && std::isfinite(*rho)))
    throw InputError("solver: rho must be positive and finite");
  if (!(tol_primal > 0.0 && tol_primal < 1.0)) throw InputError("solver: tol_primal must lie in (0, 1)");
  if (!(tol_dual > 0.0 && tol_dual < 1.0)) throw InputError("solver: tol_dual must lie in (0, 1)");
  if (max_iter < 1) throw InputError("solver: max_iter must be >= 1");
  if (log_every < 0) throw InputError("solver: log_every must be >= 0");
}

std::string to_string(Splitting splitting) {
  return splitting == Splitting::kTwoBlock ? "two_block" : "consensus";
}

Splitting parse_splitting(const std::string& name) {
  if (name == "two_block") return Splitting::kTwoBlock;
  if (name == "consensus") return Splitting::kConsensus;
  throw InputError("unknown splitting '" + name + "' (expected two_block or consensus)");
}

SymMatrix row_sum_psd_project(const SymMatrix& m, int k) {
  require_shape(m.order(), k, "row_sum_psd_project");
  Eigen::MatrixXd y = m.dense();
  PsdProjector projector(m.order());
  row_sum_psd_project_inplace(y, k, projector);
  return SymMatrix::symmetrized(y);
}

SymMatrix affine_project(const SymMatrix& m, int k) {
  require_shape(m.order(), k, "affine_project");
  Eigen::MatrixXd y = m.dense();
  affine_project_inplace(y, k);
  return SymMatrix::symmetrized(y);
}

FeasibilityReport feasibility(const SymMatrix& y, int k) {
  const Eigen::Index n = y.order();
  if (n == 0 || k < 1 || n % k != 0) throw InputError("feasibility: k must divide the matrix order");
  const double target = static_cast<double>(n) / k;
  const Eigen::MatrixXd& m = y.dense();
  FeasibilityReport report;
  report.row_sum_resid = (m.rowwise().sum().array() - target).abs().maxCoeff() / target;
  report.diag_resid = (m.diagonal().array() - 1.0).abs().maxCoeff();
  report.neg_entry = std::max(0.0, -m.minCoeff());
  report.min_eig = min_eigenvalue(y);
  return report;
}

double inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) throw InputError("inner: order mismatch");
  return a.dense().cwiseProduct(b.dense()).sum();
}

SymMatrix elementwise_round(const SymMatrix& y) {
  Eigen::MatrixXd r = (y.dense().array() >= 0.5).cast<double>().matrix();
  return SymMatrix(std::move(r));
}

SdpSolution solve_sdp(const SymMatrix& a, int k, const SolverConfig& config,
                      const std::function<void(const SolverProgress&)>& on_progress) {
  const Eigen::Index n = a.order();
  require_shape(n, k, "solve_sdp");
  config.validate();

  const Eigen::MatrixXd& cost = a.dense();
  double rho = config.rho.value_or(cost.norm() / static_cast<double>(n));
  if (!(rho > 0.0)) rho = 1.0;

  // Average of all balanced cluster matrices: feasible, and favors no partition.
  const double alpha = (static_cast<double>(n) / k - 1.0) / (static_cast<double>(n) - 1.0);
  Eigen::MatrixXd z = Eigen::MatrixXd::Constant(n, n, alpha);
  z.diagonal().setOnes();

  Monitor monitor(config, cost, on_progress, rho);
  bool converged = false;
  SdpSolution solution;
  solution.iterations = config.splitting == Splitting::kTwoBlock
                            ? run_two_block(cost, k, config, monitor, z, converged)
                            : run_consensus(cost, k, config, monitor, z, converged);
  monitor.finish(solution, z, converged);
  solution.objective = inner(solution.Y, a);
  solution.residuals = feasibility(solution.Y, k);
  return solution;
}

}  // namespace sgmm
