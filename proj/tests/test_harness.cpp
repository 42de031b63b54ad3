#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "wavedet/harness.hpp"
#include "wavedet/io.hpp"
#include "wavedet/montecarlo.hpp"

using namespace wavedet;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(# small but complete run
pulse_length = 256
f_start = 0.01
f_end = 0.12
family = db2
scale_sets = 3;4;3,4
pfa = 0.01
snr_min = -12
snr_max = -4
snr_step = 4
trials_per_point = 400
calibration_trials = 20000
validation_noise_trials = 5000
validation_pd_trials = 200
n_pos = 120
n_neg = 120
train_snr_lo = -12
train_snr_hi = -4
c_grid = 1:1,0.1:10
root_seed = 7
)";

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "wavedet_harness_tests" / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config text round trip and hash") {
    const auto cfg = parse_config(kTinyConfig);
    CHECK(cfg.pulse.length == 256);
    CHECK(cfg.family == "db2");
    REQUIRE(cfg.scale_sets.size() == 3);
    CHECK(cfg.scale_sets[2] == std::vector<int>{3, 4});
    CHECK(cfg.c_grid.size() == 2);
    CHECK(cfg.c_grid[1] == CPair{0.1, 10.0});
    const auto again = parse_config(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    CHECK(again.hash() == cfg.hash());
    auto other = cfg;
    other.root_seed = 8;
    CHECK(other.hash() != cfg.hash());
  }

  TEST_CASE("default config is valid and describes the standard study") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.pfa == 1e-3);
    CHECK(cfg.scale_sets.size() == 6);
    CHECK(parse_config("").to_text() == cfg.to_text());
  }

  TEST_CASE("config validation") {
    CHECK_THROWS(parse_config("unknown_key = 1\n"));
    CHECK_THROWS(parse_config("pfa\n"));
    // db5 at scale 7 of 1024 samples leaves 8 <= L = 10 coefficients.
    CHECK_THROWS(parse_config("scale_sets = 7\n"));
    CHECK_THROWS(parse_config("calibration_trials = 1000\n"));
    CHECK_THROWS(parse_config("pfa = 1.5\n"));
    CHECK_THROWS(parse_config("trials_per_point = 10\n"));
    CHECK_THROWS(parse_config("pulse_length = 1000\n"));
    CHECK_THROWS(parse_config("c_grid = 1\n"));
  }

  TEST_CASE("scale set labels") {
    CHECK(scale_set_label({4}) == "d4");
    CHECK(scale_set_label({3, 4, 5, 6}) == "d3_d4_d5_d6");
  }

  TEST_CASE("calibration error term") {
    CHECK(calibration_pd_stderr(0.5, 1e-3, 0) == 0.0);
    const double a = calibration_pd_stderr(0.5, 1e-3, 100000);
    const double b = calibration_pd_stderr(0.5, 1e-3, 400000);
    CHECK(a == doctest::Approx(2.0 * b));
    CHECK(calibration_pd_stderr(0.999999, 1e-3, 100000) < a);
  }

  TEST_CASE("tiny experiment runs, writes and re-checks") {
    const auto cfg = parse_config(kTinyConfig);
    const auto report = run_experiment(cfg);
    REQUIRE(report.sets.size() == 3);
    for (const auto& c : report.checks) {
      CAPTURE(c.name);
      CAPTURE(c.detail);
      CHECK(c.passed);
    }
    CHECK(report.valid());
    for (const auto& s : report.sets) {
      CHECK(s.theory.points.size() == 3);
      CHECK(s.svm_curve.points.size() == 3);
      CHECK(s.baseline_curve.points.size() == 3);
      CHECK(s.svm.calibration().method == CalibrationMethod::monte_carlo);
      CHECK(s.tuning.size() == 2);
      CHECK(s.pulse_norm > 0.0);
    }
    const auto rows = gap_table(report);
    CHECK(rows.size() == 9);

    const auto dir = fresh_dir("tiny");
    write_report(report, dir);
    for (const char* f : {"config.txt", "gap_table.csv", "self_check.txt", "d3_theory.csv",
                          "d3_d4_svm.csv", "d4_baseline.csv", "d3_optimum.det", "d4_svm.det"}) {
      CHECK(fs::exists(dir / f));
    }
    const auto csv = io::read_text(dir / "d3_svm.csv");
    CHECK(csv.find("# config_hash=" + std::to_string(cfg.hash())) != std::string::npos);
    CHECK(csv.find("# root_seed=7") != std::string::npos);
    CHECK(check_output_dir(dir).passed());

    SUBCASE("tampering with a curve is detected") {
      auto text = io::read_text(dir / "d3_d4_theory.csv");
      // Drop the concatenated set's theory to zero: it no longer dominates d3.
      auto curve = io::parse_curve_csv(text);
      for (auto& p : curve.points) p.pd = 0.0;
      io::write_atomic(dir / "d3_d4_theory.csv",
                       io::format_curve_csv(curve, {"config_hash=" + std::to_string(cfg.hash())}));
      CHECK_FALSE(check_output_dir(dir).passed());
    }
    SUBCASE("a foreign config hash is detected") {
      auto text = io::read_text(dir / "d4_svm.csv");
      text.replace(text.find("config_hash="), 13, "config_hash=0");
      io::write_atomic(dir / "d4_svm.csv", text);
      CHECK_FALSE(check_output_dir(dir).passed());
    }
    SUBCASE("missing files are detected") {
      fs::remove(dir / "d4_baseline.csv");
      CHECK_FALSE(check_output_dir(dir).passed());
    }
  }

  TEST_CASE("experiment output is a pure function of the config") {
    auto cfg = parse_config(kTinyConfig);
    cfg.scale_sets = {{3}};
    const unsigned saved = worker_threads();
    set_worker_threads(1);
    const auto a = run_experiment(cfg);
    set_worker_threads(4);
    const auto b = run_experiment(cfg);
    set_worker_threads(saved);
    const auto da = fresh_dir("pure_a");
    const auto db = fresh_dir("pure_b");
    write_report(a, da);
    write_report(b, db);
    for (const char* f : {"d3_svm.csv", "d3_baseline.csv", "d3_svm.det", "gap_table.csv"}) {
      CHECK(io::read_text(da / f) == io::read_text(db / f));
    }
  }

  TEST_CASE("empty output directory fails the check") {
    const auto dir = fresh_dir("empty");
    fs::create_directories(dir);
    CHECK_FALSE(check_output_dir(dir).passed());
  }
}
