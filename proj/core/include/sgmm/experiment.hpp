#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgmm/mixture.hpp"
#include "sgmm/pipeline.hpp"

namespace sgmm {

enum class CenterLayout { kSimplex, kTwoPoint, kFile };

struct ModelConfig {
  int n = 0;
  int k = 0;
  int d = 0;
  CenterLayout layout = CenterLayout::kSimplex;
  /// layout = file: k x d centers, rescaled to each sweep separation.
  Eigen::MatrixXd centers;
  NoiseModel noise;
};

enum class SweepAxis { kSnr, kDelta };

struct SweepConfig {
  SweepAxis axis = SweepAxis::kSnr;
  std::vector<double> values;
  int replicates = 1;
  std::uint64_t base_seed = 0;
};

struct CheckConfig {
  bool run_oracle_ip = true;
  bool run_lloyd = false;
  int lloyd_max_iter = 100;
  bool check_snr_condition = true;
  double c_s = 1.0;
};

struct OutputConfig {
  std::string path;
  /// false writes NA for runtime_ms so reruns are byte-identical.
  bool record_runtime = true;
  int threads = 1;
};

/// INI layout (sections and keys):
///   [model]   n, k, d, layout = simplex | two_point | file, centers_file,
///             noise = gaussian | ball | sphere, sigma, ball_constant
///   [sweep]   snr = comma list | delta = comma list, replicates, base_seed
///   [solver]  splitting, rho, tol, tol_primal, tol_dual, max_iter,
///             adaptive_rho, exact_projection, log_every, ball_radius
///   [checks]  run_oracle_ip, run_lloyd, lloyd_max_iter, check_snr_condition, c_s
///   [output]  path, record_runtime, threads
/// Unknown sections or keys are rejected.
struct ExperimentConfig {
  ModelConfig model;
  SweepConfig sweep;
  PipelineConfig pipeline;
  CheckConfig checks;
  OutputConfig output;

  /// Throws InputError on any inconsistency (replicates outside [1, 1000],
  /// non-positive sweep values, k not dividing n, ...).
  void validate() const;
};

/// centers_file is resolved against base_dir when relative.
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Generating spec for one sweep point. With the snr axis delta = s * tau.
MixtureSpec sweep_spec(const ExperimentConfig& config, std::size_t sweep_index);

/// base_seed + 1000 * sweep_index + replicate_index.
std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t sweep_index, int replicate_index);

/// One CSV row. NaN and empty optionals are written as NA: for checks that
/// were disabled, for quantities that are undefined (snr with tau = 0) and
/// for everything after a failure, which is described in error.
struct ExperimentRecord {
  int run_id = 0;
  std::uint64_t seed = 0;
  int n = 0, k = 0, d = 0;
  double snr = 0.0, delta = 0.0, tau = 0.0;
  std::optional<int> sdp_converged;
  std::optional<int> sdp_iters;
  double objective = 0.0;
  double l1_ratio = 0.0;
  double ip_ratio = 0.0;
  double misrate = 0.0;
  double misrate_lloyd = 0.0;
  double center_err_perm = 0.0;
  std::optional<int> exact_recovery;
  double snr_condition_value = 0.0;
  double runtime_ms = 0.0;
  std::string error;
};

const std::vector<std::string>& record_header();
void write_record_header(std::ostream& out);
void write_record(std::ostream& out, const ExperimentRecord& record);

/// Generate, solve, round and measure one replicate. Failures are caught and
/// reported in the record. Lloyd's seed is Rng::mix(seed), decorrelated from
/// the data stream.
ExperimentRecord run_replicate(const ExperimentConfig& config, std::size_t sweep_index, int replicate_index);

/// All sweep points x replicates, rows streamed to out in (sweep, replicate)
/// order after the header, whatever the thread count. on_row, if set, is
/// called after each row is written.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, std::ostream& out,
                                             const std::function<void(const ExperimentRecord&)>& on_row = {});

struct SnrCondition {
  double value = 0.0;  // C_s (sqrt(k d log n / n) + k d / n + k)
  bool satisfied = false;  // s^2 >= value
};

/// Natural logarithm. Diagnostic only; nothing is gated on it.
SnrCondition snr_condition(int n, int k, int d, double s, double c_s);

struct SweepSummary {
  std::string snr, delta;  // as written in the CSV
  int n = 0;
  int runs = 0;
  int failed = 0;
  double converged_frac = 0.0;
  double median_misrate = 0.0;
  double mean_misrate = 0.0;
  double recovery_freq = 0.0;
  /// Fraction of rows with l1_ratio <= 2 * (2 * ip_ratio); NaN without IP data.
  double hidden_integrality_frac = 0.0;
};

struct ExperimentSummary {
  std::vector<SweepSummary> points;  // in order of first appearance
  /// Least-squares slope of log(median misrate + 1/n) against s^2 across
  /// sweep points; NaN with fewer than two distinct finite s.
  double decay_slope = 0.0;
};

/// Reads a CSV produced by run_experiment. Throws ParseError naming the line.
ExperimentSummary summarize(std::istream& csv);
void write_summary(std::ostream& out, const ExperimentSummary& summary);

}  // namespace sgmm
