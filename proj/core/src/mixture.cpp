#include "sgmm/mixture.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "sgmm/csv.hpp"
#include "sgmm/error.hpp"
#include "sgmm/rng.hpp"

namespace sgmm {

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kSphericalGaussian: return "gaussian";
    case NoiseFamily::kUniformBall: return "ball";
    case NoiseFamily::kUniformSphere: return "sphere";
  }
  return "unknown";
}

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "gaussian" || name == "spherical_gaussian") return NoiseFamily::kSphericalGaussian;
  if (name == "ball" || name == "uniform_ball") return NoiseFamily::kUniformBall;
  if (name == "sphere" || name == "uniform_sphere") return NoiseFamily::kUniformSphere;
  throw InputError("unknown noise family '" + name + "' (expected gaussian, ball or sphere)");
}

double MixtureSpec::tau() const {
  if (noise.family == NoiseFamily::kSphericalGaussian) return noise.sigma;
  return noise.ball_constant * std::sqrt(1.0 / static_cast<double>(d()));
}

void MixtureSpec::validate() const {
  if (k < 2) throw InputError("mixture: need k >= 2, got " + std::to_string(k));
  if (n < 4) throw InputError("mixture: need n >= 4, got " + std::to_string(n));
  if (n % k != 0)
    throw InputError("mixture: n = " + std::to_string(n) + " is not a multiple of k = " +
                     std::to_string(k));
  if (centers.rows() != k)
    throw InputError("mixture: expected " + std::to_string(k) + " centers, got " +
                     std::to_string(centers.rows()));
  if (centers.cols() < 1) throw InputError("mixture: dimension d must be >= 1");
  if (!centers.allFinite()) throw InputError("mixture: non-finite center coordinate");
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (centers.row(a) == centers.row(b))
        throw InputError("mixture: centers " + std::to_string(a + 1) + " and " +
                         std::to_string(b + 1) + " coincide");
  if (noise.family == NoiseFamily::kSphericalGaussian) {
    if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma))
      throw InputError("mixture: sigma must be finite and >= 0");
  } else if (!(noise.ball_constant > 0.0) || !std::isfinite(noise.ball_constant)) {
    throw InputError("mixture: ball constant must be finite and > 0");
  }
}

Eigen::MatrixXd simplex_centers(int k, int d, double delta) {
  if (k < 2) throw InputError("simplex_centers: need k >= 2");
  if (d < k - 1)
    throw InputError("simplex_centers: need d >= k - 1 (d = " + std::to_string(d) +
                     ", k = " + std::to_string(k) + ")");
  if (!(delta > 0.0)) throw InputError("simplex_centers: delta must be > 0");
  // Vertices e_a - (1/k) 1 of the standard simplex span a (k-1)-dimensional
  // subspace; express them in an orthonormal basis of it.
  const Eigen::MatrixXd vertices =
      Eigen::MatrixXd::Identity(k, k) - Eigen::MatrixXd::Constant(k, k, 1.0 / k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(vertices.leftCols(k - 1));
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(k, k - 1);
  const Eigen::MatrixXd coords = vertices * basis;  // k x (k-1), pairwise distance sqrt(2)
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, d);
  centers.leftCols(k - 1) = coords * (delta / std::sqrt(2.0));
  return centers;
}

Eigen::MatrixXd two_point_centers(int d, double delta) {
  if (d < 1) throw InputError("two_point_centers: need d >= 1");
  if (!(delta > 0.0)) throw InputError("two_point_centers: delta must be > 0");
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(2, d);
  centers(1, 0) = delta;
  return centers;
}

Eigen::MatrixXd rescale_centers(const Eigen::MatrixXd& centers, double delta) {
  if (!(delta > 0.0)) throw InputError("rescale_centers: delta must be > 0");
  double min_sep = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < centers.rows(); ++a)
    for (Eigen::Index b = a + 1; b < centers.rows(); ++b)
      min_sep = std::min(min_sep, (centers.row(a) - centers.row(b)).norm());
  if (!(min_sep > 0.0) || !std::isfinite(min_sep))
    throw InputError("rescale_centers: centers must be distinct and at least two");
  const Eigen::RowVectorXd mean = centers.colwise().mean();
  return ((centers.rowwise() - mean) * (delta / min_sep)).rowwise() + mean;
}

SnrReport snr(const MixtureSpec& spec) {
  spec.validate();
  SnrReport report;
  report.separations = Eigen::MatrixXd::Zero(spec.k, spec.k);
  report.delta = std::numeric_limits<double>::infinity();
  for (int a = 0; a < spec.k; ++a) {
    for (int b = a + 1; b < spec.k; ++b) {
      const double sep = (spec.centers.row(a) - spec.centers.row(b)).norm();
      report.separations(a, b) = report.separations(b, a) = sep;
      report.delta = std::min(report.delta, sep);
    }
  }
  if (!(report.delta > 0.0)) throw InputError("snr: coincident centers");
  report.tau = spec.tau();
  report.snr = report.tau > 0.0 ? report.delta / report.tau
                                : std::numeric_limits<double>::infinity();
  return report;
}

Eigen::MatrixXd Dataset::noise() const {
  if (!spec) throw InputError("dataset has no generating spec; noise is unknown");
  Eigen::MatrixXd g(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    g.row(i) = points.row(i) - spec->centers.row(labels[static_cast<std::size_t>(i)]);
  return g;
}

Dataset sample_dataset(const MixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int n = spec.n;
  const int d = spec.d();
  const int size = spec.cluster_size();

  Dataset data;
  data.spec = spec;
  data.seed = seed;
  data.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) data.labels[static_cast<std::size_t>(i)] = i / size;
  rng.shuffle(std::span<int>(data.labels));

  data.points.resize(n, d);
  Eigen::VectorXd g(d);
  for (int i = 0; i < n; ++i) {
    switch (spec.noise.family) {
      case NoiseFamily::kSphericalGaussian:
        for (int c = 0; c < d; ++c) g(c) = spec.noise.sigma * rng.normal();
        break;
      case NoiseFamily::kUniformBall:
      case NoiseFamily::kUniformSphere: {
        double norm = 0.0;
        do {
          for (int c = 0; c < d; ++c) g(c) = rng.normal();
          norm = g.norm();
        } while (norm == 0.0);
        double radius = 1.0;
        if (spec.noise.family == NoiseFamily::kUniformBall)
          radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        g *= radius / norm;
        break;
      }
    }
    data.points.row(i) = spec.centers.row(data.labels[static_cast<std::size_t>(i)]) + g.transpose();
  }
  return data;
}

void require_balanced(const Labels& labels, int k, const char* context) {
  const auto n = static_cast<int>(labels.size());
  if (k < 1) throw InputError(std::string(context) + ": k must be >= 1");
  if (n % k != 0)
    throw InputError(std::string(context) + ": n = " + std::to_string(n) +
                     " is not a multiple of k = " + std::to_string(k));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int label : labels) {
    if (label < 0 || label >= k)
      throw InputError(std::string(context) + ": label " + std::to_string(label + 1) +
                       " outside [1, " + std::to_string(k) + "]");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int a = 0; a < k; ++a)
    if (counts[static_cast<std::size_t>(a)] != n / k)
      throw InputError(std::string(context) + ": cluster " + std::to_string(a + 1) + " has " +
                       std::to_string(counts[static_cast<std::size_t>(a)]) + " points, expected " +
                       std::to_string(n / k));
}

Eigen::MatrixXd assignment_matrix(const Labels& labels, int k) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= k)
      throw InputError("assignment_matrix: label " + std::to_string(label + 1) + " outside [1, " +
                       std::to_string(k) + "]");
    f(i, label) = 1.0;
  }
  return f;
}

SymMatrix cluster_matrix(const Labels& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      m(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  return SymMatrix(std::move(m));
}

GroundTruth ground_truth(const Labels& labels, int k) {
  require_balanced(labels, k, "ground_truth");
  return {cluster_matrix(labels), assignment_matrix(labels, k)};
}

void write_dataset_csv(std::ostream& out, const Points& points, const Labels& labels) {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw InputError("write_dataset_csv: label count does not match point count");
  for (Eigen::Index c = 0; c < points.cols(); ++c) out << (c > 0 ? ",x" : "x") << (c + 1);
  if (!labels.empty()) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index c = 0; c < points.cols(); ++c)
      out << (c > 0 ? "," : "") << csv::format_double(points(i, c));
    if (!labels.empty()) out << ',' << (labels[static_cast<std::size_t>(i)] + 1);
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
  const auto header = csv::split(line);
  std::size_t d = header.size();
  const bool has_labels = header.back() == "label";
  if (has_labels) --d;
  if (d == 0) throw ParseError("header has no coordinate columns", 1);
  for (std::size_t c = 0; c < d; ++c)
    if (header[c] != "x" + std::to_string(c + 1))
      throw ParseError("header column " + std::to_string(c + 1) + " should be x" +
                           std::to_string(c + 1),
                       1);

  std::vector<double> coords;
  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    for (std::size_t c = 0; c < d; ++c) {
      const double v = csv::parse_double(fields[c], line_no);
      if (!std::isfinite(v)) throw ParseError("non-finite coordinate", line_no);
      coords.push_back(v);
    }
    if (has_labels) {
      const long long label = csv::parse_int(fields[d], line_no);
      if (label < 1) throw ParseError("labels are 1-based positive integers", line_no);
      data.labels.push_back(static_cast<int>(label - 1));
    }
  }
  const auto n = static_cast<Eigen::Index>(coords.size() / d);
  data.points = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      coords.data(), n, static_cast<Eigen::Index>(d));
  return data;
}

}  // namespace sgmm
