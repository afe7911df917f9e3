#include "sgmm/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include "sgmm/csv.hpp"
#include "sgmm/error.hpp"
#include "sgmm/metrics.hpp"
#include "sgmm/oracle.hpp"
#include "sgmm/rng.hpp"

namespace sgmm {
namespace {

namespace pt = boost::property_tree;

constexpr double kNA = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

class Section {
 public:
  Section(const pt::ptree& tree, std::string name) : name_(std::move(name)) {
    if (auto child = tree.get_child_optional(name_)) node_ = &*child;
  }

  bool has(const std::string& key) const { return node_ && node_->get_child_optional(key); }

  std::string text(const std::string& key) const { return trim(node_->get<std::string>(key)); }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return to_real(text(key), key);
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) fail(key, "expected an integer, got '" + v + "'");
    return out;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  std::string word(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::string v = text(key);
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = v.find(',', start);
      out.push_back(to_real(trim(v.substr(start, comma - start)), key));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    if (!node_) return;
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : *node_)
      if (!allowed.count(key)) throw InputError("config: unknown key '" + key + "' in [" + name_ + "]");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw InputError("config: [" + name_ + "] " + key + ": " + what);
  }

 private:
  double to_real(const std::string& v, const std::string& key) const {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) fail(key, "expected a number, got '" + v + "'");
    return out;
  }

  std::string name_;
  const pt::ptree* node_ = nullptr;
};

CenterLayout parse_layout(const std::string& name) {
  if (name == "simplex") return CenterLayout::kSimplex;
  if (name == "two_point") return CenterLayout::kTwoPoint;
  if (name == "file") return CenterLayout::kFile;
  throw InputError("config: unknown layout '" + name + "' (expected simplex, two_point or file)");
}

double noise_tau(const ModelConfig& model) {
  if (model.noise.family == NoiseFamily::kSphericalGaussian) return model.noise.sigma;
  return model.noise.ball_constant * std::sqrt(1.0 / model.d);
}

std::string sanitize(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

std::string opt_field(const std::optional<int>& v) { return v ? std::to_string(*v) : "NA"; }

double median(std::vector<double> v) {
  if (v.empty()) return kNA;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (model.k < 2) throw InputError("config: [model] k must be >= 2");
  if (model.n < 4) throw InputError("config: [model] n must be >= 4");
  if (model.n % model.k != 0)
    throw InputError("config: [model] n = " + std::to_string(model.n) + " is not a multiple of k = " +
                     std::to_string(model.k));
  if (model.d < 1) throw InputError("config: [model] d must be >= 1");
  if (model.layout == CenterLayout::kSimplex && model.d < model.k - 1)
    throw InputError("config: simplex layout needs d >= k - 1");
  if (model.layout == CenterLayout::kTwoPoint && model.k != 2)
    throw InputError("config: two_point layout needs k = 2");
  if (model.layout == CenterLayout::kFile && (model.centers.rows() != model.k || model.centers.cols() != model.d))
    throw InputError("config: centers file must hold k rows of d coordinates");
  if (sweep.values.empty()) throw InputError("config: [sweep] needs snr or delta values");
  for (double v : sweep.values)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("config: [sweep] values must be positive and finite");
  if (sweep.axis == SweepAxis::kSnr && !(noise_tau(model) > 0.0))
    throw InputError("config: an snr sweep needs a positive noise scale; use delta instead");
  if (sweep.replicates < 1 || sweep.replicates > 1000)
    throw InputError("config: [sweep] replicates must lie in [1, 1000] so seeds stay distinct");
  pipeline.solver.validate();
  if (pipeline.ball_radius && !(*pipeline.ball_radius >= 0.0))
    throw InputError("config: [solver] ball_radius must be >= 0");
  if (checks.lloyd_max_iter < 1) throw InputError("config: [checks] lloyd_max_iter must be >= 1");
  if (!(checks.c_s >= 0.0)) throw InputError("config: [checks] c_s must be >= 0");
  if (output.threads < 1) throw InputError("config: [output] threads must be >= 1");
}

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  const std::set<std::string> sections = {"model", "sweep", "solver", "checks", "output"};
  for (const auto& [name, child] : tree) {
    if (!sections.count(name)) throw InputError("config: unknown section [" + name + "]");
  }

  ExperimentConfig cfg;
  const Section model(tree, "model");
  model.allow_only({"n", "k", "d", "layout", "centers_file", "noise", "sigma", "ball_constant"});
  cfg.model.n = static_cast<int>(model.integer("n", 0));
  cfg.model.k = static_cast<int>(model.integer("k", 0));
  cfg.model.d = static_cast<int>(model.integer("d", 0));
  cfg.model.layout = parse_layout(model.word("layout", "simplex"));
  cfg.model.noise.family = parse_noise_family(model.word("noise", "gaussian"));
  cfg.model.noise.sigma = model.real("sigma", 1.0);
  cfg.model.noise.ball_constant = model.real("ball_constant", 1.0);
  if (cfg.model.layout == CenterLayout::kFile) {
    if (!model.has("centers_file")) model.fail("centers_file", "required with layout = file");
    std::filesystem::path file = model.text("centers_file");
    if (file.is_relative()) file = base_dir / file;
    std::ifstream centers(file);
    if (!centers) throw InputError("config: cannot open centers file " + file.string());
    cfg.model.centers = csv::read_matrix(centers);
  }

  const Section sweep(tree, "sweep");
  sweep.allow_only({"snr", "delta", "replicates", "base_seed"});
  if (sweep.has("snr") == sweep.has("delta")) throw InputError("config: [sweep] needs exactly one of snr or delta");
  cfg.sweep.axis = sweep.has("snr") ? SweepAxis::kSnr : SweepAxis::kDelta;
  cfg.sweep.values = sweep.list(sweep.has("snr") ? "snr" : "delta");
  cfg.sweep.replicates = static_cast<int>(sweep.integer("replicates", 1));
  const long long base_seed = sweep.integer("base_seed", 0);
  if (base_seed < 0) sweep.fail("base_seed", "must be >= 0");
  cfg.sweep.base_seed = static_cast<std::uint64_t>(base_seed);

  const Section solver(tree, "solver");
  solver.allow_only({"splitting", "rho", "tol", "tol_primal", "tol_dual", "max_iter", "adaptive_rho",
                     "exact_projection", "log_every", "ball_radius"});
  SolverConfig& sc = cfg.pipeline.solver;
  sc.splitting = parse_splitting(solver.word("splitting", to_string(sc.splitting)));
  if (solver.has("rho")) sc.rho = solver.real("rho", 1.0);
  sc.tol_primal = sc.tol_dual = solver.real("tol", sc.tol_primal);
  sc.tol_primal = solver.real("tol_primal", sc.tol_primal);
  sc.tol_dual = solver.real("tol_dual", sc.tol_dual);
  sc.max_iter = static_cast<int>(solver.integer("max_iter", sc.max_iter));
  sc.adaptive_rho = solver.flag("adaptive_rho", sc.adaptive_rho);
  sc.exact_projection = solver.flag("exact_projection", sc.exact_projection);
  sc.log_every = static_cast<int>(solver.integer("log_every", 0));
  if (solver.has("ball_radius")) cfg.pipeline.ball_radius = solver.real("ball_radius", 0.0);

  const Section checks(tree, "checks");
  checks.allow_only({"run_oracle_ip", "run_lloyd", "lloyd_max_iter", "check_snr_condition", "c_s"});
  cfg.checks.run_oracle_ip = checks.flag("run_oracle_ip", cfg.checks.run_oracle_ip);
  cfg.checks.run_lloyd = checks.flag("run_lloyd", cfg.checks.run_lloyd);
  cfg.checks.lloyd_max_iter = static_cast<int>(checks.integer("lloyd_max_iter", cfg.checks.lloyd_max_iter));
  cfg.checks.check_snr_condition = checks.flag("check_snr_condition", cfg.checks.check_snr_condition);
  cfg.checks.c_s = checks.real("c_s", cfg.checks.c_s);

  const Section output(tree, "output");
  output.allow_only({"path", "record_runtime", "threads"});
  cfg.output.path = output.word("path", "");
  cfg.output.record_runtime = output.flag("record_runtime", cfg.output.record_runtime);
  cfg.output.threads = static_cast<int>(output.integer("threads", 1));

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  return parse_experiment_config(in, path.parent_path());
}

MixtureSpec sweep_spec(const ExperimentConfig& config, std::size_t sweep_index) {
  if (sweep_index >= config.sweep.values.size()) throw InputError("sweep_spec: sweep index out of range");
  const ModelConfig& model = config.model;
  const double value = config.sweep.values[sweep_index];
  const double delta = config.sweep.axis == SweepAxis::kSnr ? value * noise_tau(model) : value;
  MixtureSpec spec;
  spec.n = model.n;
  spec.k = model.k;
  spec.noise = model.noise;
  switch (model.layout) {
    case CenterLayout::kSimplex: spec.centers = simplex_centers(model.k, model.d, delta); break;
    case CenterLayout::kTwoPoint: spec.centers = two_point_centers(model.d, delta); break;
    case CenterLayout::kFile: spec.centers = rescale_centers(model.centers, delta); break;
  }
  spec.validate();
  return spec;
}

std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t sweep_index, int replicate_index) {
  return config.sweep.base_seed + 1000ULL * sweep_index + static_cast<std::uint64_t>(replicate_index);
}

const std::vector<std::string>& record_header() {
  static const std::vector<std::string> header = {
      "run_id", "seed", "n", "k", "d", "snr", "delta", "tau", "sdp_converged", "sdp_iters",
      "objective", "l1_ratio", "ip_ratio", "misrate", "misrate_lloyd", "center_err_perm",
      "exact_recovery", "snr_condition_value", "runtime_ms", "error"};
  return header;
}

void write_record_header(std::ostream& out) {
  const auto& header = record_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

void write_record(std::ostream& out, const ExperimentRecord& r) {
  using csv::format_double;
  out << r.run_id << ',' << r.seed << ',' << r.n << ',' << r.k << ',' << r.d << ',' << format_double(r.snr) << ','
      << format_double(r.delta) << ',' << format_double(r.tau) << ',' << opt_field(r.sdp_converged) << ','
      << opt_field(r.sdp_iters) << ',' << format_double(r.objective) << ',' << format_double(r.l1_ratio) << ','
      << format_double(r.ip_ratio) << ',' << format_double(r.misrate) << ',' << format_double(r.misrate_lloyd)
      << ',' << format_double(r.center_err_perm) << ',' << opt_field(r.exact_recovery) << ','
      << format_double(r.snr_condition_value) << ',' << format_double(r.runtime_ms) << ','
      << sanitize(r.error) << '\n';
}

ExperimentRecord run_replicate(const ExperimentConfig& config, std::size_t sweep_index, int replicate_index) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentRecord r;
  r.run_id = static_cast<int>(sweep_index) * config.sweep.replicates + replicate_index;
  r.seed = replicate_seed(config, sweep_index, replicate_index);
  r.n = config.model.n;
  r.k = config.model.k;
  r.d = config.model.d;
  r.objective = r.l1_ratio = r.ip_ratio = r.misrate = r.misrate_lloyd = r.center_err_perm = kNA;
  r.snr = r.delta = r.tau = r.snr_condition_value = r.runtime_ms = kNA;
  try {
    const MixtureSpec spec = sweep_spec(config, sweep_index);
    // The nominal sweep value is recorded exactly; the other quantity is
    // derived from it and tau.
    const SnrReport report = snr(spec);
    const double value = config.sweep.values[sweep_index];
    r.tau = report.tau;
    if (config.sweep.axis == SweepAxis::kSnr) {
      r.snr = value;
      r.delta = value * r.tau;
    } else {
      r.delta = value;
      r.snr = r.tau > 0.0 ? value / r.tau : kNA;
    }
    if (config.checks.check_snr_condition && std::isfinite(r.snr))
      r.snr_condition_value = snr_condition(r.n, r.k, r.d, r.snr, config.checks.c_s).value;

    const Dataset data = sample_dataset(spec, r.seed);
    const ClusteringResult result = cluster_dataset(data.points, r.k, config.pipeline);
    const GroundTruth truth = ground_truth(data.labels, r.k);

    r.sdp_converged = result.sdp.converged ? 1 : 0;
    r.sdp_iters = result.sdp.iterations;
    r.objective = result.sdp.objective;
    r.l1_ratio = l1_error(result.sdp.Y, truth.cluster_matrix).ratio;
    r.misrate = misrate(result.labels, data.labels, r.k).rate;
    r.exact_recovery = elementwise_round(result.sdp.Y) == truth.cluster_matrix ? 1 : 0;
    r.center_err_perm = center_error(result.centers_hat, spec.centers).perm_matched;
    if (config.checks.run_oracle_ip) r.ip_ratio = ip_worst_error(build_instance(data)).ratio;
    if (config.checks.run_lloyd)
      r.misrate_lloyd =
          misrate(lloyd_baseline(data.points, r.k, Rng::mix(r.seed), config.checks.lloyd_max_iter), data.labels, r.k)
              .rate;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  if (config.output.record_runtime)
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, std::ostream& out,
                                             const std::function<void(const ExperimentRecord&)>& on_row) {
  config.validate();
  const std::size_t points = config.sweep.values.size();
  const auto reps = static_cast<std::size_t>(config.sweep.replicates);
  const std::size_t total = points * reps;
  std::vector<ExperimentRecord> records(total);

  write_record_header(out);
  auto emit = [&](std::size_t i) {
    write_record(out, records[i]);
    out.flush();
    if (!out) throw std::ios_base::failure("experiment: write failed");
    if (on_row) on_row(records[i]);
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.output.threads), total);
  if (threads <= 1) {
    for (std::size_t i = 0; i < total; ++i) {
      records[i] = run_replicate(config, i / reps, static_cast<int>(i % reps));
      emit(i);
    }
    return records;
  }

  // Workers claim indices in order; the calling thread writes the completed
  // prefix so the file order never depends on scheduling.
  std::atomic<std::size_t> next{0};
  std::vector<char> done(total, 0);
  std::mutex mutex;
  std::condition_variable ready;
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) {
        ExperimentRecord r = run_replicate(config, i / reps, static_cast<int>(i % reps));
        {
          std::lock_guard lock(mutex);
          records[i] = std::move(r);
          done[i] = 1;
        }
        ready.notify_one();
      }
    });
  }
  for (std::size_t i = 0; i < total; ++i) {
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return done[i] != 0; });
    }
    emit(i);
  }
  return records;
}

SnrCondition snr_condition(int n, int k, int d, double s, double c_s) {
  if (n < 2 || k < 1 || d < 1) throw InputError("snr_condition: need n >= 2, k >= 1, d >= 1");
  const double kd = static_cast<double>(k) * d;
  const double nn = static_cast<double>(n);
  SnrCondition out;
  out.value = c_s * (std::sqrt(kd * std::log(nn) / nn) + kd / nn + k);
  out.satisfied = s * s >= out.value;
  return out;
}

ExperimentSummary summarize(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty experiment file", 1);
  const auto header = csv::split(line);
  const auto& expected = record_header();
  if (header.size() != expected.size() || !std::equal(header.begin(), header.end(), expected.begin()))
    throw ParseError("header does not match the experiment record schema", 1);
  auto column = [&](const char* name) {
    return static_cast<std::size_t>(std::find(expected.begin(), expected.end(), name) - expected.begin());
  };
  const std::size_t c_n = column("n"), c_snr = column("snr"), c_delta = column("delta"),
                    c_conv = column("sdp_converged"), c_l1 = column("l1_ratio"), c_ip = column("ip_ratio"),
                    c_mis = column("misrate"), c_exact = column("exact_recovery"), c_err = column("error");

  struct Acc {
    SweepSummary s;
    std::vector<double> misrates;
    int converged = 0, exact = 0, exact_rows = 0, hi_ok = 0, hi_rows = 0;
  };
  std::vector<Acc> groups;
  std::map<std::pair<std::string, std::string>, std::size_t> index;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    if (f.size() != expected.size())
      throw ParseError("expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(f.size()),
                       line_no);
    const auto key = std::make_pair(std::string(f[c_snr]), std::string(f[c_delta]));
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) {
      groups.emplace_back();
      groups.back().s.snr = key.first;
      groups.back().s.delta = key.second;
      groups.back().s.n = static_cast<int>(csv::parse_int(f[c_n], line_no));
    }
    Acc& g = groups[it->second];
    ++g.s.runs;
    if (!f[c_err].empty()) {
      ++g.s.failed;
      continue;
    }
    if (f[c_conv] != "NA" && csv::parse_int(f[c_conv], line_no) == 1) ++g.converged;
    const double mis = csv::parse_double(f[c_mis], line_no);
    if (std::isfinite(mis)) g.misrates.push_back(mis);
    if (f[c_exact] != "NA") {
      ++g.exact_rows;
      g.exact += csv::parse_int(f[c_exact], line_no) == 1 ? 1 : 0;
    }
    const double l1 = csv::parse_double(f[c_l1], line_no);
    const double ip = csv::parse_double(f[c_ip], line_no);
    if (std::isfinite(l1) && std::isfinite(ip)) {
      ++g.hi_rows;
      g.hi_ok += l1 <= 2.0 * (2.0 * ip) ? 1 : 0;
    }
  }

  ExperimentSummary out;
  std::vector<double> xs, ys;
  for (Acc& g : groups) {
    const int ok = g.s.runs - g.s.failed;
    g.s.converged_frac = ok > 0 ? static_cast<double>(g.converged) / ok : kNA;
    g.s.median_misrate = median(g.misrates);
    g.s.mean_misrate = g.misrates.empty() ? kNA
                                          : std::accumulate(g.misrates.begin(), g.misrates.end(), 0.0) /
                                                static_cast<double>(g.misrates.size());
    g.s.recovery_freq = g.exact_rows > 0 ? static_cast<double>(g.exact) / g.exact_rows : kNA;
    g.s.hidden_integrality_frac = g.hi_rows > 0 ? static_cast<double>(g.hi_ok) / g.hi_rows : kNA;
    const double s = csv::parse_double(g.s.snr, 0);
    if (std::isfinite(s) && std::isfinite(g.s.median_misrate) && g.s.n > 0) {
      xs.push_back(s * s);
      ys.push_back(std::log(g.s.median_misrate + 1.0 / g.s.n));
    }
    out.points.push_back(g.s);
  }

  out.decay_slope = kNA;
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx > 0.0) out.decay_slope = sxy / sxx;
  }
  return out;
}

void write_summary(std::ostream& out, const ExperimentSummary& summary) {
  using csv::format_double;
  out << "snr,delta,n,runs,failed,converged_frac,median_misrate,mean_misrate,recovery_freq,"
         "hidden_integrality_frac\n";
  for (const auto& p : summary.points)
    out << p.snr << ',' << p.delta << ',' << p.n << ',' << p.runs << ',' << p.failed << ','
        << format_double(p.converged_frac) << ',' << format_double(p.median_misrate) << ','
        << format_double(p.mean_misrate) << ',' << format_double(p.recovery_freq) << ','
        << format_double(p.hidden_integrality_frac) << '\n';
  out << "# decay_slope," << format_double(summary.decay_slope) << '\n';
}

}  // namespace sgmm
