#include "sgmm/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sgmm/error.hpp"

namespace sgmm {
namespace {

// Symmetric table of ||Y_u. - Y_w.||_1; Y is symmetric, so columns are rows.
Eigen::MatrixXd row_l1_distances(const Eigen::MatrixXd& y) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index w = u + 1; w < n; ++w)
      dist(w, u) = dist(u, w) = (y.col(u) - y.col(w)).cwiseAbs().sum();
  return dist;
}

}  // namespace

BallCover extract_balls(const SymMatrix& y, int k, std::optional<double> radius) {
  const auto n = static_cast<int>(y.order());
  if (k < 1 || n == 0 || n % k != 0)
    throw InputError("extract_balls: k = " + std::to_string(k) + " must divide n = " + std::to_string(n));
  const int cap = n / k;
  const double r = radius.value_or(static_cast<double>(n) / (4.0 * k));
  if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("extract_balls: radius must be finite and >= 0");

  const Eigen::MatrixXd dist = row_l1_distances(y.dense());
  std::vector<int> remaining(static_cast<std::size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);

  BallCover cover;
  while (!remaining.empty()) {
    int best_u = -1;
    int best_size = -1;
    for (int u : remaining) {
      int size = 0;
      for (int w : remaining) size += dist(w, u) <= r ? 1 : 0;
      if (size > best_size) {
        best_size = size;
        best_u = u;
      }
    }
    std::vector<int> ball;
    ball.reserve(static_cast<std::size_t>(best_size));
    for (int w : remaining)
      if (dist(w, best_u) <= r) ball.push_back(w);
    if (static_cast<int>(ball.size()) > cap) {
      std::stable_sort(ball.begin(), ball.end(),
                       [&](int a, int b) { return dist(a, best_u) < dist(b, best_u); });
      ball.resize(static_cast<std::size_t>(cap));
      std::sort(ball.begin(), ball.end());
    }
    std::vector<int> rest;
    rest.reserve(remaining.size() - ball.size());
    std::set_difference(remaining.begin(), remaining.end(), ball.begin(), ball.end(),
                        std::back_inserter(rest));
    remaining.swap(rest);
    cover.sets.push_back(std::move(ball));
  }
  return cover;
}

Labels equalize(const BallCover& cover, int n, int k) {
  if (k < 1 || n < 1 || n % k != 0)
    throw InputError("equalize: k = " + std::to_string(k) + " must divide n = " + std::to_string(n));
  const int cap = n / k;
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& set : cover.sets) {
    if (static_cast<int>(set.size()) > cap)
      throw InputError("equalize: a set holds " + std::to_string(set.size()) + " points, more than n/k = " +
                       std::to_string(cap));
    for (int i : set) {
      if (i < 0 || i >= n) throw InputError("equalize: index " + std::to_string(i) + " outside [0, n)");
      if (seen[static_cast<std::size_t>(i)]++) throw InputError("equalize: index " + std::to_string(i) + " repeated");
    }
  }
  if (std::count(seen.begin(), seen.end(), 0) > 0) throw InputError("equalize: sets do not cover every point");
  const auto m = static_cast<int>(cover.sets.size());
  if (m < k) throw InputError("equalize: fewer than k sets");  // unreachable for a valid cover

  std::vector<int> by_size(static_cast<std::size_t>(m));
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
    return cover.sets[static_cast<std::size_t>(a)].size() > cover.sets[static_cast<std::size_t>(b)].size();
  });
  std::vector<int> chosen(by_size.begin(), by_size.begin() + k);
  std::sort(chosen.begin(), chosen.end());

  Labels labels(static_cast<std::size_t>(n), -1);
  std::vector<int> sizes(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) {
    const auto& set = cover.sets[static_cast<std::size_t>(chosen[static_cast<std::size_t>(t)])];
    for (int i : set) labels[static_cast<std::size_t>(i)] = t;
    sizes[static_cast<std::size_t>(t)] = static_cast<int>(set.size());
  }

  std::vector<int> fill_order(static_cast<std::size_t>(k));
  std::iota(fill_order.begin(), fill_order.end(), 0);
  std::stable_sort(fill_order.begin(), fill_order.end(), [&](int a, int b) {
    return sizes[static_cast<std::size_t>(a)] < sizes[static_cast<std::size_t>(b)];
  });
  auto target = fill_order.begin();
  for (int i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] >= 0) continue;
    while (sizes[static_cast<std::size_t>(*target)] == cap) ++target;
    labels[static_cast<std::size_t>(i)] = *target;
    ++sizes[static_cast<std::size_t>(*target)];
  }
  return labels;
}

Labels cluster(const SymMatrix& y, int k, std::optional<double> radius) {
  return equalize(extract_balls(y, k, radius), static_cast<int>(y.order()), k);
}

}  // namespace sgmm
