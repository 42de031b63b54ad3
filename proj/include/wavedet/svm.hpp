#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wavedet/detector.hpp"
#include "wavedet/signal.hpp"
#include "wavedet/wavelet.hpp"

namespace wavedet {

/// Labelled wavelet-domain patterns for the linear SVM.
///
/// Each pattern is the summation-range part of d_B (see gather_range), so the
/// trained weight vector maps directly onto detector coefficients.
struct TrainingSet {
  CoefficientLayout layout;
  SumRange range = SumRange::steady;
  std::size_t dimension = 0;
  std::vector<double> patterns;  // row-major, size() x dimension
  std::vector<int> labels;       // +1 pulse present, -1 noise only
  std::vector<double> snr_db;    // per pattern, NaN for negatives
  double snr_lo = 0.0;
  double snr_hi = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> pattern(std::size_t i) const noexcept {
    return {patterns.data() + i * dimension, dimension};
  }
  /// Throws if shapes disagree, a label is not +-1 or a class is empty.
  void validate() const;
};

/// n_pos observations with SNR uniform on [snr_lo, snr_hi] and n_neg pure-noise
/// realizations, transformed to d_B and cut to the steady range. Deterministic in seed.
TrainingSet build_training_set(const SampledSignal& pulse, std::span<const int> scales,
                               const WaveletFilterPair& filters, const NoiseModel& model,
                               std::size_t n_pos, std::size_t n_neg, double snr_lo, double snr_hi,
                               std::uint64_t seed);

struct SvmParams {
  double c_plus = 1.0;   // box bound for positive patterns
  double c_minus = 1.0;  // box bound for negative patterns
  double kkt_tolerance = 1e-3;
  std::size_t max_passes = 10000;  // one pass = size() pair updates
};

struct SvmModel {
  CoefficientLayout layout;
  SumRange range = SumRange::steady;
  std::vector<double> alphas;
  std::vector<double> w;  // sum alpha_i y_i x_i
  double b = 0.0;
  double c_plus = 0.0;
  double c_minus = 0.0;
  double kkt_tolerance = 0.0;
  std::size_t support_count = 0;
  bool converged = false;
  std::size_t iterations = 0;
  double dual_objective = 0.0;
  std::vector<double> objective_history;  // after each pass, then at exit

  double box(int label) const noexcept { return label > 0 ? c_plus : c_minus; }
};

/// Soft-margin linear SVM by sequential minimal optimisation on the dual
///   max sum a_i - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>,
///   0 <= a_i <= C(y_i), sum a_i y_i = 0,
/// choosing the maximal KKT-violating pair each step. Stops when no pair
/// violates optimality by more than kkt_tolerance; a model that hits the pass
/// cap is returned with converged == false.
SvmModel train(const TrainingSet& ts, const SvmParams& params);

/// L_D evaluated directly from the alphas and the training patterns.
double dual_objective(const TrainingSet& ts, std::span<const double> alphas);

/// sum alpha_i y_i x_i.
std::vector<double> recover_weights(const TrainingSet& ts, std::span<const double> alphas);

/// Largest KKT violation of the model on its training set, measured on y f(x).
double kkt_violation(const SvmModel& model, const TrainingSet& ts);

/// f(x) = w . x + b for a pattern already cut to the summation range.
double decision(const SvmModel& model, std::span<const double> pattern);
/// f(x) for a full detail vector; throws if its layout differs from training.
double decision(const SvmModel& model, const DetailCoefficients& d);

/// Detector with a = w and V_T = -b, the trained bias.
LinearDetector to_detector(const SvmModel& model, double target_pfa);

/// Keeps w, drops the trained bias and sets V_T to the empirical (1 - pfa)
/// quantile of w . d over fresh noise (threshold_for_pfa_mc with a = w).
LinearDetector calibrate_bias(const SvmModel& model, const NoiseModel& noise, double target_pfa,
                              std::size_t trials, std::uint64_t seed);

using CPair = std::pair<double, double>;  // (c_plus, c_minus)

/// c_plus in {0.1, 1, 10} x c_minus in {1, 10, 100}.
std::vector<CPair> default_c_grid();

struct TuningOptions {
  double kkt_tolerance = 1e-3;
  std::size_t max_passes = 10000;
  std::size_t calibration_trials = 100000;
  std::size_t validation_pd_trials = 2000;
  std::size_t validation_snr_points = 4;
};

struct GridOutcome {
  CPair c;
  bool converged = false;
  double threshold = 0.0;
  double realized_pfa = 0.0;
  double mean_pd = 0.0;
  bool admissible = false;  // realized pfa within a factor 2 of the target
};

struct TuningResult {
  SvmModel model;
  LinearDetector detector;
  std::vector<GridOutcome> outcomes;
  std::size_t selected = 0;
};

/// Trains one model per (c_plus, c_minus), calibrates each on a shared noise
/// set, measures realized Pfa on `validation_noise_trials` further noise
/// realizations and mean Pd over the training SNR range, and returns the model
/// with the best mean Pd among those whose realized Pfa is within 2x of target.
/// Throws if the grid is empty or no point is admissible.
TuningResult tune_c_for_pfa(const TrainingSet& ts, const SampledSignal& pulse, double target_pfa,
                            std::span<const CPair> c_grid, std::size_t validation_noise_trials,
                            std::uint64_t seed, const NoiseModel& model = NoiseModel(1.0),
                            const TuningOptions& options = {});

}  // namespace wavedet
