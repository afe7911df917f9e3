#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgmm/linalg.hpp"

namespace sgmm {

/// Cluster labels, 0-based internally (files use 1-based labels).
using Labels = std::vector<int>;

enum class NoiseFamily { kSphericalGaussian, kUniformBall, kUniformSphere };

std::string to_string(NoiseFamily family);
NoiseFamily parse_noise_family(const std::string& name);

struct NoiseModel {
  NoiseFamily family = NoiseFamily::kSphericalGaussian;
  /// Per-coordinate standard deviation; Gaussian family only.
  double sigma = 1.0;
  /// C in tau = C * sqrt(1/d); ball and sphere families only.
  double ball_constant = 1.0;
};

/// Ground-truth balanced mixture: k centers in R^d, n points, n/k per cluster.
struct MixtureSpec {
  int n = 0;
  int k = 0;
  Eigen::MatrixXd centers;  // k x d, one center per row
  NoiseModel noise;

  int d() const noexcept { return static_cast<int>(centers.cols()); }
  int cluster_size() const noexcept { return k > 0 ? n / k : 0; }

  /// Sub-Gaussian scale: sigma for Gaussian noise, C * sqrt(1/d) for the ball
  /// and sphere families.
  double tau() const;

  /// Throws InputError unless k >= 2, n >= 4, n % k == 0, d >= 1, centers are
  /// finite and pairwise distinct, and the noise parameters are admissible.
  void validate() const;
};

/// k centers mutually at distance delta (regular simplex), embedded in R^d.
/// Requires d >= k - 1.
Eigen::MatrixXd simplex_centers(int k, int d, double delta);

/// Two centers, the origin and delta * e_1.
Eigen::MatrixXd two_point_centers(int d, double delta);

/// Uniformly rescales centers about their mean so the minimum pairwise
/// separation equals delta.
Eigen::MatrixXd rescale_centers(const Eigen::MatrixXd& centers, double delta);

struct SnrReport {
  double delta = 0.0;           // min_{a != b} ||mu_a - mu_b||
  double tau = 0.0;
  double snr = 0.0;             // delta / tau; +inf when tau == 0
  Eigen::MatrixXd separations;  // k x k table of ||mu_a - mu_b||
};

/// Throws InputError for coincident centers.
SnrReport snr(const MixtureSpec& spec);

/// Observed points with their true labels. spec is absent for data read from
/// a file, where the generating centers are unknown.
struct Dataset {
  Points points;
  Labels labels;
  std::optional<MixtureSpec> spec;
  std::uint64_t seed = 0;

  int n() const noexcept { return static_cast<int>(points.rows()); }
  int d() const noexcept { return static_cast<int>(points.cols()); }

  /// g_i = h_i - mu_{sigma*(i)}, one per row. Requires spec.
  Eigen::MatrixXd noise() const;
};

/// Draws a dataset. RNG consumption order: Fisher-Yates shuffle of the
/// balanced label vector (0,..,0,1,..,1,...), then for each point in index
/// order its d noise coordinates (Gaussian: sigma * N(0,1) per coordinate;
/// ball: a normalized Gaussian direction, then one uniform U for the radius
/// U^(1/d); sphere: the direction only). Same (spec, seed) gives a
/// bit-identical dataset.
Dataset sample_dataset(const MixtureSpec& spec, std::uint64_t seed);

struct GroundTruth {
  SymMatrix cluster_matrix;            // Y*, n x n
  Eigen::MatrixXd assignment_matrix;   // F*, n x k
};

/// F with F(i, labels[i]) = 1. Throws InputError for labels outside [0, k).
Eigen::MatrixXd assignment_matrix(const Labels& labels, int k);

/// Y = F F^T: Y_ij = 1 iff labels i and j agree.
SymMatrix cluster_matrix(const Labels& labels);

/// Labels must use every value in [0, k) exactly n/k times.
GroundTruth ground_truth(const Labels& labels, int k);

/// Throws InputError unless every label is in [0, k) and each appears n/k times.
void require_balanced(const Labels& labels, int k, const char* context);

/// CSV with header x1,...,xd,label and 1-based labels.
void write_dataset_csv(std::ostream& out, const Points& points, const Labels& labels);
Dataset read_dataset_csv(std::istream& in);

}  // namespace sgmm
