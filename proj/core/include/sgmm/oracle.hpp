#pragma once

#include <Eigen/Dense>

#include "sgmm/mixture.hpp"

namespace sgmm {

/// Points with their noise amplified by 1/(2c) = 4 around the true centers,
/// together with the margin table
///   delta(j, a) = ||hbar_j - mu_a||^2 - ||hbar_j - mu_{sigma*(j)}||^2,
/// which is zero at a = sigma*(j). Diagnostic only: needs the ground truth.
struct OracleInstance {
  static constexpr double kMargin = 0.125;

  Points points_bar;
  Eigen::MatrixXd centers;  // k x d
  Labels labels;
  Eigen::MatrixXd delta;    // n x k

  int n() const { return static_cast<int>(points_bar.rows()); }
  int k() const { return static_cast<int>(centers.rows()); }
};

/// Throws InputError if the dataset has no generating spec or its labels do
/// not match the point count.
OracleInstance build_instance(const Dataset& data);
OracleInstance build_instance(const Points& points, const Eigen::MatrixXd& centers,
                              const Labels& labels);

/// eta(F) = sum_j ||hbar_j - mu_{labels(j)}||^2.
double eta(const OracleInstance& inst, const Labels& labels);

/// Nearest true center for every amplified point, ties to the lowest index.
/// Minimizes eta over all assignments.
Labels oracle_assign(const OracleInstance& inst);

struct IpError {
  int count = 0;       // points relabeled by the worst admissible assignment
  double ratio = 0.0;  // count / n; the n x k assignment-matrix l1 ratio is 2 count / n
};

/// max { #relabeled points : eta(F) <= eta(F*) }. With m_j the cheapest
/// relabeling margin of point j, the answer is the longest prefix of the
/// ascending m_j (ties by index) whose running sum stays <= 0.
IpError ip_worst_error(const OracleInstance& inst);

/// Same quantity by enumerating all k^n assignments. Throws InputError when
/// k^n > 10^6.
int ip_worst_error_bruteforce(const OracleInstance& inst);

}  // namespace sgmm
