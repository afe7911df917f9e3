#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sgmm/csv.hpp"
#include "sgmm/error.hpp"
#include "sgmm/experiment.hpp"
#include "sgmm/metrics.hpp"
#include "sgmm/mixture.hpp"
#include "sgmm/pipeline.hpp"
#include "sgmm/sdp.hpp"

namespace {

using nlohmann::json;
using namespace sgmm;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNumericalError = 2;

// Writes to path, or to stdout when path is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw std::ios_base::failure("cannot open " + path + " for writing");
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }
  void close(const std::string& path) {
    get().flush();
    if (!get()) throw std::ios_base::failure("write to " + (path.empty() ? std::string("stdout") : path) + " failed");
  }

 private:
  std::ofstream file_;
};

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path);
  return read_dataset_csv(in);
}

json feasibility_json(const FeasibilityReport& f) {
  return {{"row_sum_resid", f.row_sum_resid},
          {"diag_resid", f.diag_resid},
          {"neg_entry", f.neg_entry},
          {"min_eig", f.min_eig}};
}

json sdp_json(const SdpSolution& s) {
  return {{"converged", s.converged},     {"iterations", s.iterations},     {"objective", s.objective},
          {"primal_resid", s.primal_resid}, {"dual_resid", s.dual_resid}, {"rho", s.rho},
          {"feasibility", feasibility_json(s.residuals)}};
}

struct SolverFlags {
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> rho;
  std::string splitting = to_string(SolverConfig{}.splitting);
  bool verbose = false;
  bool exact = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "Primal and dual tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--rho", rho, "Initial penalty")->check(CLI::PositiveNumber);
    cmd->add_option("--splitting", splitting, "two_block or consensus");
    cmd->add_flag("--exact-projection", exact, "Full eigendecomposition in every PSD projection");
    cmd->add_flag("-v,--verbose", verbose, "Log residuals to stderr every 50 iterations");
  }

  SolverConfig config() const {
    SolverConfig c;
    c.splitting = parse_splitting(splitting);
    if (tol) c.tol_primal = c.tol_dual = *tol;
    if (max_iter) c.max_iter = *max_iter;
    c.rho = rho;
    c.exact_projection = exact;
    if (verbose) c.log_every = 50;
    c.validate();
    return c;
  }
};

void log_progress(const SolverProgress& p) {
  std::cerr << "iter " << p.iteration << "  primal " << p.primal_resid << "  dual " << p.dual_resid << "  rho "
            << p.rho << "  obj " << p.objective << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced mixture clustering by SDP relaxation"};
  app.require_subcommand(1);
  int exit_code = kOk;

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a dataset CSV (x1..xd,label)");
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t gen_point = 0;
  int gen_n = 0, gen_k = 2, gen_d = 2;
  double gen_delta = 4.0, gen_sigma = 1.0, gen_ball = 1.0;
  std::string gen_noise = "gaussian";
  gen->add_option("--config", gen_config, "Experiment config; its model and sweep blocks define the mixture");
  gen->add_option("--point", gen_point, "Sweep point index when --config is given");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "Output path (default stdout)");
  gen->add_option("--n", gen_n, "Number of points");
  gen->add_option("--k", gen_k, "Number of clusters");
  gen->add_option("--d", gen_d, "Dimension");
  gen->add_option("--delta", gen_delta, "Center separation (simplex layout)");
  gen->add_option("--noise", gen_noise, "gaussian, ball or sphere");
  gen->add_option("--sigma", gen_sigma, "Gaussian noise standard deviation");
  gen->add_option("--ball-constant", gen_ball, "Ball and sphere scale constant");
  gen->callback([&] {
    MixtureSpec spec;
    if (!gen_config.empty()) {
      spec = sweep_spec(load_experiment_config(gen_config), gen_point);
    } else {
      spec.n = gen_n;
      spec.k = gen_k;
      spec.centers = simplex_centers(gen_k, gen_d, gen_delta);
      spec.noise.family = parse_noise_family(gen_noise);
      spec.noise.sigma = gen_sigma;
      spec.noise.ball_constant = gen_ball;
      spec.validate();
    }
    const Dataset data = sample_dataset(spec, gen_seed);
    Sink sink(gen_out);
    write_dataset_csv(sink.get(), data.points, data.labels);
    sink.close(gen_out);
  });

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the SDP for a dataset; JSON report on stdout");
  std::string solve_in, solve_out;
  int solve_k = 0;
  SolverFlags solve_flags;
  solve->add_option("dataset", solve_in, "Dataset CSV")->required();
  solve->add_option("--k", solve_k, "Number of clusters")->required();
  solve->add_option("--out", solve_out, "Write the solution matrix here as CSV");
  solve_flags.attach(solve);
  solve->callback([&] {
    const Dataset data = load_dataset(solve_in);
    const SdpSolution sol =
        solve_sdp(pairwise_sq_dists(data.points), solve_k, solve_flags.config(),
                  solve_flags.verbose ? std::function<void(const SolverProgress&)>(log_progress) : nullptr);
    if (!solve_out.empty()) {
      Sink sink(solve_out);
      csv::write_matrix(sink.get(), sol.Y.dense());
      sink.close(solve_out);
    }
    json report = sdp_json(sol);
    if (!data.labels.empty()) {
      const GroundTruth truth = ground_truth(data.labels, solve_k);
      report["l1_ratio"] = l1_error(sol.Y, truth.cluster_matrix).ratio;
      report["exact_recovery"] = elementwise_round(sol.Y) == truth.cluster_matrix;
    }
    std::cout << report.dump(2) << '\n';
    if (!sol.converged) exit_code = kNumericalError;
  });

  // cluster
  auto* clus = app.add_subcommand("cluster", "Cluster a dataset; labels and centers as CSV, JSON report on stdout");
  std::string clus_in, clus_out, clus_centers;
  int clus_k = 0;
  std::optional<double> clus_radius;
  SolverFlags clus_flags;
  clus->add_option("dataset", clus_in, "Dataset CSV")->required();
  clus->add_option("--k", clus_k, "Number of clusters")->required();
  clus->add_option("--out", clus_out, "Labels output, one 1-based label per line");
  clus->add_option("--centers", clus_centers, "Estimated centers output, one per row");
  clus->add_option("--radius", clus_radius, "Rounding ball radius (default n/(4k))")->check(CLI::NonNegativeNumber);
  clus_flags.attach(clus);
  clus->callback([&] {
    const Dataset data = load_dataset(clus_in);
    PipelineConfig config;
    config.solver = clus_flags.config();
    config.ball_radius = clus_radius;
    const ClusteringResult result =
        cluster_dataset(data.points, clus_k, config,
                        clus_flags.verbose ? std::function<void(const SolverProgress&)>(log_progress) : nullptr);
    if (!clus_out.empty()) {
      Sink sink(clus_out);
      for (int label : result.labels) sink.get() << label + 1 << '\n';
      sink.close(clus_out);
    }
    if (!clus_centers.empty()) {
      Sink sink(clus_centers);
      csv::write_matrix(sink.get(), result.centers_hat);
      sink.close(clus_centers);
    }
    json report = {{"sdp", sdp_json(result.sdp)},
                   {"runtime_ms",
                    {{"distances", result.runtime_ms.distances_ms},
                     {"sdp", result.runtime_ms.sdp_ms},
                     {"rounding", result.runtime_ms.rounding_ms},
                     {"centers", result.runtime_ms.centers_ms}}}};
    if (!data.labels.empty()) report["misrate"] = misrate(result.labels, data.labels, clus_k).rate;
    std::cout << report.dump(2) << '\n';
    if (!result.sdp.converged) exit_code = kNumericalError;
  });

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a configured Monte-Carlo sweep; one CSV row per replicate");
  std::string exp_config, exp_out;
  std::optional<std::uint64_t> exp_seed;
  std::optional<double> exp_tol;
  std::optional<int> exp_max_iter, exp_threads;
  bool exp_quiet = false;
  exp->add_option("--config", exp_config, "INI config")->required();
  exp->add_option("--out", exp_out, "CSV output (overrides [output] path; default stdout)");
  exp->add_option("--seed", exp_seed, "Overrides [sweep] base_seed");
  exp->add_option("--tol", exp_tol, "Overrides [solver] tol")->check(CLI::PositiveNumber);
  exp->add_option("--max-iter", exp_max_iter, "Overrides [solver] max_iter")->check(CLI::PositiveNumber);
  exp->add_option("--threads", exp_threads, "Overrides [output] threads")->check(CLI::PositiveNumber);
  exp->add_flag("-q,--quiet", exp_quiet, "No per-row progress on stderr");
  exp->callback([&] {
    ExperimentConfig config = load_experiment_config(exp_config);
    if (exp_seed) config.sweep.base_seed = *exp_seed;
    if (exp_tol) config.pipeline.solver.tol_primal = config.pipeline.solver.tol_dual = *exp_tol;
    if (exp_max_iter) config.pipeline.solver.max_iter = *exp_max_iter;
    if (exp_threads) config.output.threads = *exp_threads;
    if (!exp_out.empty()) config.output.path = exp_out;
    config.validate();
    Sink sink(config.output.path);
    const std::size_t total = config.sweep.values.size() * static_cast<std::size_t>(config.sweep.replicates);
    std::size_t done = 0;
    run_experiment(config, sink.get(), [&](const ExperimentRecord& r) {
      ++done;
      if (exp_quiet) return;
      std::cerr << '[' << done << '/' << total << "] seed " << r.seed << " misrate "
                << csv::format_double(r.misrate);
      if (!r.error.empty()) std::cerr << " error: " << r.error;
      std::cerr << '\n';
    });
    sink.close(config.output.path);
  });

  // summarize
  auto* sum = app.add_subcommand("summarize", "Per-sweep-point summary of an experiment CSV");
  std::string sum_in, sum_out;
  sum->add_option("csv", sum_in, "Experiment CSV")->required();
  sum->add_option("--out", sum_out, "Output path (default stdout)");
  sum->callback([&] {
    std::ifstream in(sum_in);
    if (!in) throw InputError("cannot open " + sum_in);
    const ExperimentSummary summary = summarize(in);
    Sink sink(sum_out);
    write_summary(sink.get(), summary);
    sink.close(sum_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  if (exit_code == kNumericalError) std::cerr << "warning: the SDP solver did not converge\n";
  return exit_code;
}
