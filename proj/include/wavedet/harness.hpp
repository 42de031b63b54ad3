#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wavedet/detector.hpp"
#include "wavedet/signal.hpp"
#include "wavedet/svm.hpp"

namespace wavedet {

/// Parameters of the chirp / Daubechies detection experiment.
///
/// Stored as a flat `key = value` text file; `#` starts a comment. Scale sets
/// are written `3;4;5;6;4,5,6;3,4,5,6` and the C grid `0.1:1,0.1:10,...`.
struct ExperimentConfig {
  ChirpSpec pulse;
  std::string family = "db5";
  double sigma = 1.0;
  std::vector<std::vector<int>> scale_sets = {{3}, {4}, {5}, {6}, {4, 5, 6}, {3, 4, 5, 6}};
  double pfa = 1e-3;
  double snr_min = -15.0;
  double snr_max = 0.0;
  double snr_step = 1.0;
  std::size_t trials_per_point = 10000;
  std::size_t calibration_trials = 200000;
  std::size_t validation_noise_trials = 100000;
  std::size_t validation_pd_trials = 2000;
  std::size_t n_pos = 1000;
  std::size_t n_neg = 1000;
  double train_snr_lo = -15.0;
  double train_snr_hi = 0.0;
  std::vector<CPair> c_grid = default_c_grid();
  double kkt_tolerance = 1e-3;
  std::size_t max_passes = 10000;
  std::uint64_t root_seed = 20031101;

  /// Throws std::invalid_argument when a scale leaves no steady coefficients
  /// (2^(N-i) <= L), pfa * calibration_trials < 100, or any size is zero.
  void validate() const;

  std::string to_text() const;
  /// FNV-1a of to_text(); embedded in every CSV.
  std::uint64_t hash() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig read_config(const std::filesystem::path& path);

/// "d3", "d4_d5_d6", ...
std::string scale_set_label(const std::vector<int>& scales);

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ScaleSetResult {
  std::vector<int> scales;
  std::string label;
  double pulse_norm = 0.0;  // steady-range norm of the pulse's d_B
  LinearDetector optimum;  // analytic threshold
  DetectionCurve theory;
  LinearDetector optimum_mc;  // same coefficients, Monte Carlo threshold
  DetectionCurve optimum_mc_curve;
  LinearDetector svm;
  SvmModel svm_model;
  std::vector<GridOutcome> tuning;
  DetectionCurve svm_curve;
  MaxCoefficientDetector baseline;
  DetectionCurve baseline_curve;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::vector<ScaleSetResult> sets;
  std::vector<SelfCheck> checks;

  bool valid() const;
};

/// For every scale set: optimum detector and its analytic curve, tuned and
/// calibrated SVM detector, and the max-coefficient baseline. The SVM, baseline
/// and Monte Carlo-thresholded optimum curves share their observations. Runs the consistency self-checks. Pure function of the config.
/// Sub-operation failures are rethrown as std::runtime_error naming (scale set, stage).
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

struct GapRow {
  std::string scales;
  double snr_db = 0.0;
  double pd_theory = 0.0;
  double pd_svm = 0.0;
  double pd_baseline = 0.0;
  double gap = 0.0;              // pd_theory - pd_svm
  double combined_stderr = 0.0;  // Monte Carlo and threshold-calibration error of pd_svm
};

/// One row per (scale set, SNR). Throws if a set lacks its SVM or baseline curve,
/// or the curves disagree on the SNR grid.
std::vector<GapRow> gap_table(const ExperimentReport& report);

/// Standard error that a Monte Carlo threshold (n_cal noise trials, target pfa)
/// adds to a Pd estimate near `pd`.
double calibration_pd_stderr(double pd, double pfa, std::size_t calibration_trials);

/// Writes config.txt, per-set CSVs and detector files, gap_table.csv and
/// self_check.txt into `dir`. Each file is written atomically.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

struct CheckOutcome {
  std::vector<SelfCheck> checks;
  bool passed() const;
};

/// Re-verifies a written report from its files alone.
CheckOutcome check_output_dir(const std::filesystem::path& dir);

}  // namespace wavedet
