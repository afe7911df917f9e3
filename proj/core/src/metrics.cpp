#include "sgmm/metrics.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "sgmm/error.hpp"

namespace sgmm {
namespace {

using CostTable = std::vector<std::vector<long long>>;

// Minimum-cost perfect assignment on a square table (Hungarian method with
// potentials). Returns the optimal total; row_to_col receives the matching.
long long hungarian(const CostTable& cost, std::vector<int>& row_to_col) {
  const auto m = static_cast<int>(cost.size());
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(static_cast<std::size_t>(m + 1), 0), v(static_cast<std::size_t>(m + 1), 0);
  std::vector<int> match(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
  for (int i = 1; i <= m; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<long long> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(m + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      long long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const long long cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                              u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  row_to_col.assign(static_cast<std::size_t>(m), -1);
  long long total = 0;
  for (int j = 1; j <= m; ++j) {
    const int row = match[static_cast<std::size_t>(j)] - 1;
    row_to_col[static_cast<std::size_t>(row)] = j - 1;
    total += cost[static_cast<std::size_t>(row)][static_cast<std::size_t>(j - 1)];
  }
  return total;
}

// Optimal cost of rows [first, k) over the columns not marked taken.
long long completion_cost(const CostTable& cost, int first, const std::vector<char>& taken) {
  std::vector<int> cols;
  for (std::size_t c = 0; c < taken.size(); ++c)
    if (!taken[c]) cols.push_back(static_cast<int>(c));
  const auto m = static_cast<int>(cols.size());
  if (m == 0) return 0;
  CostTable sub(static_cast<std::size_t>(m), std::vector<long long>(static_cast<std::size_t>(m)));
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      sub[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          cost[static_cast<std::size_t>(first + r)][static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])];
  std::vector<int> unused;
  return hungarian(sub, unused);
}

void check_labels(const Labels& labels, int k, const char* which) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= k)
      throw InputError(std::string("misrate: ") + which + " label " + std::to_string(labels[i] + 1) +
                       " at point " + std::to_string(i + 1) + " outside [1, " + std::to_string(k) + "]");
}

// Kuhn augmenting path on the bipartite graph {(a, b) : dist(a, b) <= t}.
bool augment(int a, const Eigen::MatrixXd& dist, double t, std::vector<int>& owner, std::vector<char>& visited) {
  for (Eigen::Index b = 0; b < dist.cols(); ++b) {
    if (dist(a, b) > t || visited[static_cast<std::size_t>(b)]) continue;
    visited[static_cast<std::size_t>(b)] = 1;
    if (owner[static_cast<std::size_t>(b)] < 0 ||
        augment(owner[static_cast<std::size_t>(b)], dist, t, owner, visited)) {
      owner[static_cast<std::size_t>(b)] = a;
      return true;
    }
  }
  return false;
}

bool perfect_matching(const Eigen::MatrixXd& dist, double t) {
  const auto k = static_cast<int>(dist.rows());
  std::vector<int> owner(static_cast<std::size_t>(k), -1);
  for (int a = 0; a < k; ++a) {
    std::vector<char> visited(static_cast<std::size_t>(k), 0);
    if (!augment(a, dist, t, owner, visited)) return false;
  }
  return true;
}

}  // namespace

Misrate misrate(const Labels& hat, const Labels& star, int k) {
  if (k < 1) throw InputError("misrate: k must be >= 1");
  if (hat.size() != star.size())
    throw InputError("misrate: " + std::to_string(hat.size()) + " estimated labels vs " +
                     std::to_string(star.size()) + " true labels");
  if (hat.empty()) throw InputError("misrate: empty label vectors");
  check_labels(hat, k, "estimated");
  check_labels(star, k, "true");

  // cost[a][b] = -#{i : star_i = a, hat_i = b}
  CostTable cost(static_cast<std::size_t>(k), std::vector<long long>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < hat.size(); ++i)
    --cost[static_cast<std::size_t>(star[i])][static_cast<std::size_t>(hat[i])];

  std::vector<int> unused;
  const long long optimum = hungarian(cost, unused);

  // Lexicographic tie-break: fix perm[0], perm[1], ... to the smallest column
  // that still admits an optimal completion.
  Misrate out;
  out.perm.assign(static_cast<std::size_t>(k), -1);
  std::vector<char> taken(static_cast<std::size_t>(k), 0);
  long long prefix = 0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (taken[static_cast<std::size_t>(b)]) continue;
      taken[static_cast<std::size_t>(b)] = 1;
      const long long with_b = prefix + cost[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      if (with_b + completion_cost(cost, a + 1, taken) == optimum) {
        out.perm[static_cast<std::size_t>(a)] = b;
        prefix = with_b;
        break;
      }
      taken[static_cast<std::size_t>(b)] = 0;
    }
  }
  const auto n = static_cast<long long>(hat.size());
  out.mismatches = static_cast<int>(n + optimum);
  out.rate = static_cast<double>(n + optimum) / static_cast<double>(n);
  return out;
}

L1Error l1_error(const SymMatrix& y_hat, const SymMatrix& y_star) {
  if (y_hat.order() != y_star.order())
    throw InputError("l1_error: orders differ (" + std::to_string(y_hat.order()) + " vs " +
                     std::to_string(y_star.order()) + ")");
  L1Error out;
  out.error = l1_norm(y_hat.dense() - y_star.dense());
  const double scale = l1_norm(y_star.dense());
  out.ratio = scale > 0.0 ? out.error / scale : std::numeric_limits<double>::quiet_NaN();
  return out;
}

CenterError center_error(const Eigen::MatrixXd& mu_hat, const Eigen::MatrixXd& mu) {
  if (mu_hat.rows() != mu.rows() || mu_hat.cols() != mu.cols())
    throw InputError("center_error: expected matching k x d tables, got " + std::to_string(mu_hat.rows()) +
                     "x" + std::to_string(mu_hat.cols()) + " and " + std::to_string(mu.rows()) + "x" +
                     std::to_string(mu.cols()));
  const Eigen::Index k = mu.rows();
  CenterError out;
  if (k == 0) return out;
  Eigen::MatrixXd dist(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) dist(a, b) = (mu_hat.row(a) - mu.row(b)).norm();

  out.nearest = dist.rowwise().minCoeff().maxCoeff();

  std::vector<double> thresholds(dist.data(), dist.data() + dist.size());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::size_t lo = 0, hi = thresholds.size() - 1;  // the largest threshold always matches
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (perfect_matching(dist, thresholds[mid])) hi = mid;
    else lo = mid + 1;
  }
  out.perm_matched = thresholds[lo];
  return out;
}

}  // namespace sgmm
