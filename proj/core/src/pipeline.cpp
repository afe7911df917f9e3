#include "sgmm/pipeline.hpp"

#include <chrono>
#include <string>

#include "sgmm/error.hpp"
#include "sgmm/rng.hpp"
#include "sgmm/rounding.hpp"

namespace sgmm {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Nearest center per point, ties to the lower index.
void assign_nearest(const Points& points, const Eigen::MatrixXd& centers, Labels& labels,
                    Eigen::VectorXd& dist) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_dist = (points.row(i) - centers.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centers.rows(); ++c) {
      const double d = (points.row(i) - centers.row(c)).squaredNorm();
      if (d < best_dist) {
        best = static_cast<int>(c);
        best_dist = d;
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist(i) = best_dist;
  }
}

Eigen::MatrixXd kmeanspp_seed(const Points& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        running += d2(i);
        if (d2(i) > 0.0) pick = i;
        if (running > target && d2(i) > 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Eigen::MatrixXd estimate_centers(const Points& points, const Labels& labels, int k) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw InputError("estimate_centers: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(points.rows()) + " points");
  require_balanced(labels, k, "estimate_centers");
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
  return centers * (static_cast<double>(k) / static_cast<double>(points.rows()));
}

ClusteringResult cluster_dataset(const Points& points, int k, const PipelineConfig& config,
                                 const std::function<void(const SolverProgress&)>& on_progress) {
  ClusteringResult result;
  auto start = Clock::now();
  const SymMatrix distances = pairwise_sq_dists(points);
  result.runtime_ms.distances_ms = elapsed_ms(start);

  start = Clock::now();
  result.sdp = solve_sdp(distances, k, config.solver, on_progress);
  result.runtime_ms.sdp_ms = elapsed_ms(start);

  start = Clock::now();
  result.labels = cluster(result.sdp.Y, k, config.ball_radius);
  result.runtime_ms.rounding_ms = elapsed_ms(start);

  start = Clock::now();
  result.centers_hat = estimate_centers(points, result.labels, k);
  result.runtime_ms.centers_ms = elapsed_ms(start);
  return result;
}

Labels lloyd_baseline(const Points& points, int k, std::uint64_t seed, int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw InputError("lloyd_baseline: k must be >= 1");
  if (n < k) throw InputError("lloyd_baseline: fewer points than clusters");
  if (max_iter < 1) throw InputError("lloyd_baseline: max_iter must be >= 1");
  if (!points.allFinite()) throw InputError("lloyd_baseline: non-finite coordinate");

  Rng rng(seed);
  Eigen::MatrixXd centers = kmeanspp_seed(points, k, rng);
  Labels labels(static_cast<std::size_t>(n)), previous;
  Eigen::VectorXd dist(n);
  std::vector<int> counts(static_cast<std::size_t>(k));

  for (int iter = 0; iter < max_iter; ++iter) {
    assign_nearest(points, centers, labels, dist);
    std::fill(counts.begin(), counts.end(), 0);
    for (int label : labels) ++counts[static_cast<std::size_t>(label)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] > 1 && (far < 0 || dist(i) > dist(far)))
          far = i;
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist(far) = 0.0;
      centers.row(c) = points.row(far);
    }
    if (labels == previous) break;
    centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= counts[static_cast<std::size_t>(c)];
    previous = labels;
  }
  return labels;
}

}  // namespace sgmm
