#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "sgmm/mixture.hpp"
#include "sgmm/sdp.hpp"

namespace sgmm {

/// muhat_a = (k/n) sum_{i : labels_i = a} h_i, one center per row. Throws
/// InputError unless the labels are balanced.
Eigen::MatrixXd estimate_centers(const Points& points, const Labels& labels, int k);

struct PipelineConfig {
  SolverConfig solver;
  /// Ball radius for the rounding step; n / (4k) when unset.
  std::optional<double> ball_radius;
};

struct StageTimes {
  double distances_ms = 0.0;
  double sdp_ms = 0.0;
  double rounding_ms = 0.0;
  double centers_ms = 0.0;
};

struct ClusteringResult {
  SdpSolution sdp;
  Labels labels;               // balanced
  Eigen::MatrixXd centers_hat; // k x d
  StageTimes runtime_ms;
};

/// Distances, SDP, ball rounding, center means. A non-converged SDP is not an
/// error: the result carries sdp.converged = false.
ClusteringResult cluster_dataset(const Points& points, int k, const PipelineConfig& config = {},
                                 const std::function<void(const SolverProgress&)>& on_progress = {});

/// Lloyd's algorithm from k-means++ seeding. Assignments go to the nearest
/// center (ties to the lower index); an emptied cluster is reseeded at the
/// point farthest from its current center. Stops when labels repeat or after
/// max_iter rounds. Output is not balanced.
Labels lloyd_baseline(const Points& points, int k, std::uint64_t seed, int max_iter = 100);

}  // namespace sgmm
