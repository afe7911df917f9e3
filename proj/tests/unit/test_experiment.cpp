#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sgmm/csv.hpp"
#include "sgmm/error.hpp"
#include "sgmm/experiment.hpp"
#include "sgmm/rng.hpp"

using namespace sgmm;

namespace {

constexpr const char* kSmall = R"(
[model]
n = 12
k = 2
d = 3
sigma = 1.0

[sweep]
snr = 4, 8
replicates = 3
base_seed = 5

[solver]
tol = 1e-5
max_iter = 2000

[checks]
run_lloyd = true

[output]
record_runtime = false
)";

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in);
}

std::string run_to_string(const ExperimentConfig& config) {
  std::ostringstream out;
  run_experiment(config, out);
  return out.str();
}

ExperimentRecord row(double s, double misrate, int n) {
  ExperimentRecord r;
  r.n = n;
  r.k = 2;
  r.d = 1;
  r.snr = s;
  r.delta = s;
  r.tau = 1.0;
  r.sdp_converged = 1;
  r.sdp_iters = 10;
  r.misrate = misrate;
  r.l1_ratio = 0.1;
  r.ip_ratio = 0.1;
  r.exact_recovery = misrate == 0.0 ? 1 : 0;
  return r;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config parsing") {
    const ExperimentConfig c = parse(kSmall);
    CHECK(c.model.n == 12);
    CHECK(c.model.noise.family == NoiseFamily::kSphericalGaussian);
    CHECK(c.sweep.axis == SweepAxis::kSnr);
    CHECK(c.sweep.values == std::vector<double>{4.0, 8.0});
    CHECK(c.pipeline.solver.tol_primal == 1e-5);
    CHECK(c.pipeline.solver.tol_dual == 1e-5);
    CHECK(c.pipeline.solver.max_iter == 2000);
    CHECK(c.checks.run_lloyd);
    CHECK(c.checks.run_oracle_ip);
    CHECK_FALSE(c.output.record_runtime);

    const ExperimentConfig ball =
        parse("[model]\nn=8\nk=2\nd=100\nlayout=two_point\nnoise=ball\n[sweep]\ndelta=0.5\n");
    const MixtureSpec spec = sweep_spec(ball, 0);
    CHECK(spec.tau() == doctest::Approx(0.1));
    CHECK((spec.centers.row(1) - spec.centers.row(0)).norm() == doctest::Approx(0.5));
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse("[model]\nn=12\nk=5\nd=3\n[sweep]\nsnr=4\n"), InputError);
    CHECK_THROWS_AS(parse("[model]\nn=12\nk=2\nd=3\n[sweep]\nsnr=4\ndelta=2\n"), InputError);
    CHECK_THROWS_AS(parse("[model]\nn=12\nk=2\nd=3\ncolour=red\n[sweep]\nsnr=4\n"), InputError);
    CHECK_THROWS_AS(parse("[model]\nn=12\nk=2\nd=3\n[sweep]\nsnr=4\n[extra]\nx=1\n"), InputError);
    CHECK_THROWS_AS(parse("[model]\nn=twelve\nk=2\nd=3\n[sweep]\nsnr=4\n"), InputError);
    CHECK_THROWS_AS(parse("[model]\nn=12\nk=2\nd=3\nsigma=0\n[sweep]\nsnr=4\n"), InputError);
    CHECK_THROWS_AS(parse("[model]\nn=12\nk=2\nd=3\n[sweep]\nsnr=4\nreplicates=1001\n"), InputError);
    CHECK_THROWS_AS(parse("[model]\nn=12\nk=2\nd=3\n[sweep]\nsnr=-1\n"), InputError);
    try {
      parse("[model]\nn=12\nk=2\nthis line is not ini\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }

  TEST_CASE("centers file is resolved against the config directory") {
    const auto dir = std::filesystem::temp_directory_path() / "sgmm_test_centers";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "centers.csv") << "0,0\n3,0\n0,6\n";
    std::ofstream(dir / "exp.ini") << "[model]\nn=6\nk=3\nd=2\nlayout=file\ncenters_file=centers.csv\n"
                                      "[sweep]\ndelta=1.5\n";
    const ExperimentConfig c = load_experiment_config(dir / "exp.ini");
    const MixtureSpec spec = sweep_spec(c, 0);
    CHECK((spec.centers.row(0) - spec.centers.row(1)).norm() == doctest::Approx(1.5));
    CHECK((spec.centers.row(0) - spec.centers.row(2)).norm() == doctest::Approx(3.0));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("one row per replicate with distinct seeds, rerun byte-identical") {
    ExperimentConfig c = parse(kSmall);
    std::ostringstream out;
    const auto records = run_experiment(c, out);
    REQUIRE(records.size() == 6);
    std::set<std::uint64_t> seeds;
    for (std::size_t i = 0; i < records.size(); ++i) {
      seeds.insert(records[i].seed);
      CHECK(records[i].run_id == static_cast<int>(i));
      CHECK(records[i].error.empty());
      CHECK(std::isnan(records[i].runtime_ms));
    }
    CHECK(seeds.size() == 6);
    CHECK(records[0].seed == 5);
    CHECK(records[3].seed == 1005);
    CHECK(records[0].snr == 4.0);
    CHECK(records[0].delta == doctest::Approx(4.0));

    std::istringstream lines(out.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 7);

    c.output.threads = 3;
    CHECK(run_to_string(c) == out.str());
  }

  TEST_CASE("zero-noise replicate recovers exactly") {
    const ExperimentConfig c = parse(
        "[model]\nn=12\nk=3\nd=2\nsigma=0\n[sweep]\ndelta=3\n[output]\nrecord_runtime=false\n");
    const ExperimentRecord r = run_replicate(c, 0, 0);
    CHECK(r.error.empty());
    CHECK(r.misrate == 0.0);
    CHECK(r.exact_recovery == 1);
    CHECK(r.ip_ratio == 0.0);
    CHECK(r.center_err_perm < 1e-12);
    CHECK(std::isnan(r.snr));
    CHECK(std::isnan(r.misrate_lloyd));
  }

  TEST_CASE("summarize: slope of an exact exponential decay") {
    const int n = 1000;
    std::ostringstream csv;
    write_record_header(csv);
    int id = 0;
    for (double s : {1.0, 1.5, 2.0})
      for (int rep = 0; rep < 3; ++rep) {
        ExperimentRecord r = row(s, std::exp(-s * s) - 1.0 / n, n);
        r.run_id = id++;
        write_record(csv, r);
      }
    std::istringstream in(csv.str());
    const ExperimentSummary sum = summarize(in);
    REQUIRE(sum.points.size() == 3);
    CHECK(sum.decay_slope == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(sum.points[0].runs == 3);
    CHECK(sum.points[0].converged_frac == 1.0);
    CHECK(sum.points[0].hidden_integrality_frac == 1.0);
  }

  TEST_CASE("summarize: all-zero misrate, failures and NA") {
    std::ostringstream csv;
    write_record_header(csv);
    ExperimentRecord ok = row(5.0, 0.0, 100);
    write_record(csv, ok);
    ExperimentRecord bad = row(5.0, std::nan(""), 100);
    bad.run_id = 1;
    bad.error = "solver blew up, twice\nsecond line";
    write_record(csv, bad);
    ExperimentRecord other = row(6.0, 0.0, 100);
    other.run_id = 2;
    other.ip_ratio = std::nan("");
    write_record(csv, other);
    std::istringstream in(csv.str());
    const ExperimentSummary sum = summarize(in);
    REQUIRE(sum.points.size() == 2);
    CHECK(sum.points[0].runs == 2);
    CHECK(sum.points[0].failed == 1);
    CHECK(sum.points[0].median_misrate == 0.0);
    CHECK(sum.points[0].recovery_freq == 1.0);
    CHECK(std::isnan(sum.points[1].hidden_integrality_frac));
    CHECK(sum.decay_slope == doctest::Approx(0.0));

    std::ostringstream text;
    write_summary(text, sum);
    CHECK(text.str().find("# decay_slope,") != std::string::npos);

    std::istringstream wrong("a,b\n1,2\n");
    CHECK_THROWS_AS(summarize(wrong), ParseError);
    std::istringstream short_row(csv.str() + "1,2,3\n");
    try {
      summarize(short_row);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 5);
    }
  }

  TEST_CASE("snr_condition") {
    const SnrCondition c = snr_condition(400, 2, 10, 2.0, 1.0);
    CHECK(c.value == doctest::Approx(std::sqrt(20.0 * std::log(400.0) / 400.0) + 0.05 + 2.0));
    CHECK(c.value == doctest::Approx(2.5971).epsilon(1e-4));
    CHECK(c.satisfied);
    CHECK_FALSE(snr_condition(400, 2, 10, 1.6, 1.0).satisfied);
    CHECK(snr_condition(400, 2, 10, 0.0, 0.0).satisfied);
  }

  TEST_CASE("csv helpers") {
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::format_double(std::nan("")) == "NA");
    CHECK(std::isnan(csv::parse_double("NA", 1)));
    CHECK(csv::parse_double("-2.5e3", 1) == -2500.0);
    CHECK_THROWS_AS(csv::parse_double("1.5x", 7), ParseError);
    CHECK(csv::parse_int("42", 1) == 42);
    const auto parts = csv::split("a,,b\r");
    REQUIRE(parts.size() == 3);
    CHECK(parts[1].empty());
    CHECK(parts[2] == "b");
    Rng rng(1);
    Eigen::MatrixXd m(3, 2);
    for (int i = 0; i < 6; ++i) m(i) = rng.normal();
    std::stringstream io;
    csv::write_matrix(io, m);
    CHECK(csv::read_matrix(io) == m);
  }
}
