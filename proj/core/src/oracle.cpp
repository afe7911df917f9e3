#include "sgmm/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "sgmm/error.hpp"

namespace sgmm {

OracleInstance build_instance(const Dataset& data) {
  if (!data.spec) throw InputError("oracle: dataset carries no true centers");
  return build_instance(data.points, data.spec->centers, data.labels);
}

OracleInstance build_instance(const Points& points, const Eigen::MatrixXd& centers,
                              const Labels& labels) {
  const auto n = points.rows();
  const auto k = centers.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw InputError("oracle: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " points");
  if (centers.cols() != points.cols()) throw InputError("oracle: center dimension mismatch");
  if (k < 1) throw InputError("oracle: no centers");

  OracleInstance inst;
  inst.centers = centers;
  inst.labels = labels;
  inst.points_bar.resize(n, points.cols());
  const double amplify = 1.0 / (2.0 * OracleInstance::kMargin);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int label = labels[static_cast<std::size_t>(j)];
    if (label < 0 || label >= k)
      throw InputError("oracle: label " + std::to_string(label + 1) + " outside [1, " +
                       std::to_string(k) + "]");
    inst.points_bar.row(j) = centers.row(label) + amplify * (points.row(j) - centers.row(label));
  }

  inst.delta.resize(n, k);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int own = labels[static_cast<std::size_t>(j)];
    const double base = (inst.points_bar.row(j) - centers.row(own)).squaredNorm();
    for (Eigen::Index a = 0; a < k; ++a)
      inst.delta(j, a) = a == own ? 0.0 : (inst.points_bar.row(j) - centers.row(a)).squaredNorm() - base;
  }
  return inst;
}

double eta(const OracleInstance& inst, const Labels& labels) {
  if (static_cast<int>(labels.size()) != inst.n()) throw InputError("eta: label count mismatch");
  double total = 0.0;
  for (int j = 0; j < inst.n(); ++j) {
    const int a = labels[static_cast<std::size_t>(j)];
    if (a < 0 || a >= inst.k()) throw InputError("eta: label out of range");
    total += (inst.points_bar.row(j) - inst.centers.row(a)).squaredNorm();
  }
  return total;
}

Labels oracle_assign(const OracleInstance& inst) {
  Labels out(static_cast<std::size_t>(inst.n()));
  for (int j = 0; j < inst.n(); ++j) {
    int best = 0;
    double best_dist = (inst.points_bar.row(j) - inst.centers.row(0)).squaredNorm();
    for (int a = 1; a < inst.k(); ++a) {
      const double dist = (inst.points_bar.row(j) - inst.centers.row(a)).squaredNorm();
      if (dist < best_dist) {
        best = a;
        best_dist = dist;
      }
    }
    out[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

IpError ip_worst_error(const OracleInstance& inst) {
  const int n = inst.n();
  IpError out;
  if (inst.k() < 2 || n == 0) return out;
  std::vector<double> cheapest(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int own = inst.labels[static_cast<std::size_t>(j)];
    double m = std::numeric_limits<double>::infinity();
    for (int a = 0; a < inst.k(); ++a)
      if (a != own) m = std::min(m, inst.delta(j, a));
    cheapest[static_cast<std::size_t>(j)] = m;
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return cheapest[static_cast<std::size_t>(a)] < cheapest[static_cast<std::size_t>(b)];
  });
  double running = 0.0;
  for (int j : order) {
    running += cheapest[static_cast<std::size_t>(j)];
    if (running > 0.0) break;
    ++out.count;
  }
  out.ratio = static_cast<double>(out.count) / n;
  return out;
}

int ip_worst_error_bruteforce(const OracleInstance& inst) {
  const int n = inst.n();
  const int k = inst.k();
  double total = 1.0;
  for (int j = 0; j < n; ++j) {
    total *= k;
    if (total > 1e6)
      throw InputError("ip_worst_error_bruteforce: k^n exceeds 10^6 (n = " + std::to_string(n) +
                       ", k = " + std::to_string(k) + ")");
  }
  // Odometer over all label vectors; the eta difference to F* is the sum of
  // the margins of the chosen labels.
  std::vector<int> digits(static_cast<std::size_t>(n), 0);
  int best = 0;
  for (;;) {
    double excess = 0.0;
    int changed = 0;
    for (int j = 0; j < n; ++j) {
      const int a = digits[static_cast<std::size_t>(j)];
      excess += inst.delta(j, a);
      if (a != inst.labels[static_cast<std::size_t>(j)]) ++changed;
    }
    if (excess <= 0.0) best = std::max(best, changed);
    int pos = 0;
    while (pos < n && ++digits[static_cast<std::size_t>(pos)] == k) digits[static_cast<std::size_t>(pos++)] = 0;
    if (pos == n) break;
  }
  return best;
}

}  // namespace sgmm
