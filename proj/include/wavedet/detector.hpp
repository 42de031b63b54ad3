#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavedet/montecarlo.hpp"
#include "wavedet/signal.hpp"
#include "wavedet/wavelet.hpp"

namespace wavedet {

enum class CalibrationMethod { analytic, monte_carlo };

struct Calibration {
  CalibrationMethod method = CalibrationMethod::analytic;
  std::size_t trials = 0;  // monte_carlo only
  std::uint64_t seed = 0;  // monte_carlo only
};

/// Linear detector: declares the pulse present when sum a[k] d[k] > V_T, the
/// sum running over the summation range of every segment of the layout.
class LinearDetector {
 public:
  /// Throws std::invalid_argument if `coefficients` does not match the layout,
  /// is zero throughout the summation range, or target_pfa is outside (0, 1).
  LinearDetector(CoefficientLayout layout, std::vector<double> coefficients, double threshold,
                 double target_pfa, Calibration calibration = {},
                 SumRange range = SumRange::steady);

  const CoefficientLayout& layout() const noexcept { return layout_; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  double threshold() const noexcept { return threshold_; }
  double target_pfa() const noexcept { return target_pfa_; }
  const Calibration& calibration() const noexcept { return calibration_; }
  SumRange range() const noexcept { return range_; }

  double score(std::span<const double> d) const;
  /// Strict comparison: v == V_T is "no detection".
  bool detect(std::span<const double> d) const { return score(d) > threshold_; }

  LinearDetector with_threshold(double threshold, Calibration calibration) const;

 private:
  CoefficientLayout layout_;
  std::vector<double> coefficients_;
  double threshold_;
  double target_pfa_;
  Calibration calibration_;
  SumRange range_;
};

/// Gaussian performance of a linear detector at one SNR.
struct DetectorStats {
  double eta_h1 = 0.0;   // mean of v under H1 (the H0 mean is zero)
  double sigma_v = 0.0;  // standard deviation of v, identical under H0 and H1
  double pfa = 0.0;
  double pd = 0.0;
};

struct PdEstimate {
  double pd = 0.0;
  double std_error = 0.0;
};

struct CurvePoint {
  double snr_db = 0.0;
  double pd = 0.0;
  double pd_stderr = 0.0;
};

/// Pd versus SNR at a fixed Pfa. Analytic curves have trials_per_point = 0.
struct DetectionCurve {
  double pfa = 0.0;
  std::vector<CurvePoint> points;
  std::string detector_id;
  std::size_t trials_per_point = 0;
  std::uint64_t seed = 0;
};

/// sum a[k] d[k] over the summation range.
double linear_statistic(const CoefficientLayout& layout, std::span<const double> a,
                        std::span<const double> d, SumRange range = SumRange::steady);

/// Detector statistic v for detail vector `d`; throws on layout mismatch.
double statistic(const DetailCoefficients& d, const LinearDetector& det);

/// sum a[k]^2 over the summation range.
double coefficient_energy(const CoefficientLayout& layout, std::span<const double> a,
                          SumRange range = SumRange::steady);

/// Closed-form statistics of v under the white-Gaussian model:
///   sigma_v = sigma_n sqrt(sum a^2), eta = A sum a d_s, A = pulse_amplitude(snr_db),
///   pfa = Q(V_T / sigma_v), pd = Q((V_T - eta) / sigma_v).
/// Cross-covariances of the coefficients are neglected; with an orthonormal
/// periodic transform they are exactly zero.
DetectorStats analytic_stats(const DetailCoefficients& pulse_details, std::span<const double> a,
                             double snr_db, const NoiseModel& model, double threshold,
                             SumRange range = SumRange::steady);

/// V_T = sigma_v Q^{-1}(target_pfa).
double threshold_for_pfa_analytic(const CoefficientLayout& layout, std::span<const double> a,
                                  const NoiseModel& model, double target_pfa,
                                  SumRange range = SumRange::steady);

/// Empirical (1 - target_pfa) quantile of v over `trials` noise realizations.
/// Requires trials * target_pfa >= 100.
double threshold_for_pfa_mc(const CoefficientLayout& layout, std::span<const double> a,
                            const NoiseModel& model, double target_pfa, std::size_t trials,
                            std::uint64_t seed, SumRange range = SumRange::steady);

/// Copy of `det` with the analytic threshold for its target Pfa.
LinearDetector calibrate_analytic(const LinearDetector& det, const NoiseModel& model);
/// Copy of `det` with a Monte Carlo threshold for its target Pfa.
LinearDetector calibrate_mc(const LinearDetector& det, const NoiseModel& model, std::size_t trials,
                            std::uint64_t seed);

/// Monte Carlo Pd of `det` at one SNR. Requires trials >= 100.
PdEstimate estimate_pd(const LinearDetector& det, const SampledSignal& pulse, double snr_db,
                       const NoiseModel& model, std::size_t trials, std::uint64_t seed);

/// max |d[k]| over the summation range.
double max_abs_coefficient(const CoefficientLayout& layout, std::span<const double> d,
                           SumRange range = SumRange::steady);

/// Single-coefficient baseline: true iff max |d[k]| over the steady range
/// exceeds the threshold.
bool max_coeff_baseline(const DetailCoefficients& d, double threshold,
                        SumRange range = SumRange::steady);

/// Baseline detector; its threshold only ever comes from Monte Carlo.
struct MaxCoefficientDetector {
  CoefficientLayout layout;
  double threshold = 0.0;
  double target_pfa = 0.0;
  Calibration calibration;
  SumRange range = SumRange::steady;

  double score(std::span<const double> d) const { return max_abs_coefficient(layout, d, range); }
};

MaxCoefficientDetector calibrate_max_coeff(const CoefficientLayout& layout, const NoiseModel& model,
                                           double target_pfa, std::size_t trials,
                                           std::uint64_t seed, SumRange range = SumRange::steady);

PdEstimate estimate_pd(const MaxCoefficientDetector& det, const SampledSignal& pulse,
                       double snr_db, const NoiseModel& model, std::size_t trials,
                       std::uint64_t seed);

/// Inclusive grid min, min + step, ..., max (within step/1e6).
std::vector<double> make_snr_grid(double snr_min, double snr_max, double step);

/// Monte Carlo Pd per grid point; point p uses seed substream_seed(seed, p).
DetectionCurve sweep_curve(const LinearDetector& det, const SampledSignal& pulse,
                           std::span<const double> snr_grid, const NoiseModel& model,
                           std::size_t trials, std::uint64_t seed,
                           std::string detector_id = "linear");

DetectionCurve sweep_curve(const MaxCoefficientDetector& det, const SampledSignal& pulse,
                           std::span<const double> snr_grid, const NoiseModel& model,
                           std::size_t trials, std::uint64_t seed,
                           std::string detector_id = "max_coeff");

/// Pd per grid point from analytic_stats.
DetectionCurve analytic_curve(const LinearDetector& det, const DetailCoefficients& pulse_details,
                              std::span<const double> snr_grid, const NoiseModel& model,
                              std::string detector_id = "analytic");

}  // namespace wavedet
