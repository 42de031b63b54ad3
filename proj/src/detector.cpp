#include "wavedet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wavedet/gaussian.hpp"
#include "wavedet/rng.hpp"

namespace wavedet {
namespace {

std::size_t range_begin(const ScaleSegment& s, SumRange range) {
  return range == SumRange::steady ? s.steady_start : 0;
}

void check_sizes(const CoefficientLayout& layout, std::span<const double> v, const char* what) {
  if (v.size() != layout.size()) {
    throw std::invalid_argument(std::string(what) + " does not match the coefficient layout");
  }
}

void check_pfa(double pfa) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("target pfa must lie in (0, 1)");
}

void check_pd_trials(std::size_t trials) {
  if (trials < 100) throw std::invalid_argument("Pd estimation needs at least 100 trials");
}

PdEstimate pd_from_scores(std::span<const double> scores, double threshold) {
  const double pd = exceed_fraction(scores, threshold);
  return {pd, binomial_stderr(pd, scores.size())};
}

template <typename Detector>
DetectionCurve sweep(const Detector& det, double pfa, const SampledSignal& pulse,
                     std::span<const double> snr_grid, const NoiseModel& model,
                     std::size_t trials, std::uint64_t seed, std::string detector_id) {
  if (snr_grid.empty()) throw std::invalid_argument("SNR grid is empty");
  for (std::size_t p = 1; p < snr_grid.size(); ++p) {
    if (!(snr_grid[p] > snr_grid[p - 1])) {
      throw std::invalid_argument("SNR grid must be strictly increasing");
    }
  }
  DetectionCurve curve{pfa, {}, std::move(detector_id), trials, seed};
  for (std::size_t p = 0; p < snr_grid.size(); ++p) {
    const auto est = estimate_pd(det, pulse, snr_grid[p], model, trials, substream_seed(seed, p));
    curve.points.push_back({snr_grid[p], est.pd, est.std_error});
  }
  return curve;
}

}  // namespace

LinearDetector::LinearDetector(CoefficientLayout layout, std::vector<double> coefficients,
                               double threshold, double target_pfa, Calibration calibration,
                               SumRange range)
    : layout_(std::move(layout)),
      coefficients_(std::move(coefficients)),
      threshold_(threshold),
      target_pfa_(target_pfa),
      calibration_(calibration),
      range_(range) {
  check_sizes(layout_, coefficients_, "coefficient vector");
  check_pfa(target_pfa_);
  if (std::isnan(threshold_)) throw std::invalid_argument("threshold is NaN");
  if (!(coefficient_energy(layout_, coefficients_, range_) > 0.0)) {
    throw std::invalid_argument("detector coefficients are zero over the summation range");
  }
}

double LinearDetector::score(std::span<const double> d) const {
  return linear_statistic(layout_, coefficients_, d, range_);
}

LinearDetector LinearDetector::with_threshold(double threshold, Calibration calibration) const {
  return LinearDetector(layout_, coefficients_, threshold, target_pfa_, calibration, range_);
}

double linear_statistic(const CoefficientLayout& layout, std::span<const double> a,
                        std::span<const double> d, SumRange range) {
  check_sizes(layout, a, "coefficient vector");
  check_sizes(layout, d, "detail vector");
  double v = 0.0;
  for (const auto& s : layout.segments) {
    for (std::size_t k = s.offset + range_begin(s, range); k < s.offset + s.length; ++k) {
      v += a[k] * d[k];
    }
  }
  return v;
}

double statistic(const DetailCoefficients& d, const LinearDetector& det) {
  if (!(d.layout == det.layout())) {
    throw std::invalid_argument("detail layout does not match the detector layout");
  }
  return det.score(d.values);
}

double coefficient_energy(const CoefficientLayout& layout, std::span<const double> a,
                          SumRange range) {
  return linear_statistic(layout, a, a, range);
}

DetectorStats analytic_stats(const DetailCoefficients& pulse_details, std::span<const double> a,
                             double snr_db, const NoiseModel& model, double threshold,
                             SumRange range) {
  const double energy = coefficient_energy(pulse_details.layout, a, range);
  if (!(energy > 0.0)) throw std::invalid_argument("detector coefficients are all zero");
  DetectorStats stats;
  stats.sigma_v = model.sigma() * std::sqrt(energy);
  stats.eta_h1 = pulse_amplitude(snr_db, model) *
                 linear_statistic(pulse_details.layout, a, pulse_details.values, range);
  stats.pfa = q_function(threshold / stats.sigma_v);
  stats.pd = q_function((threshold - stats.eta_h1) / stats.sigma_v);
  return stats;
}

double threshold_for_pfa_analytic(const CoefficientLayout& layout, std::span<const double> a,
                                  const NoiseModel& model, double target_pfa, SumRange range) {
  check_pfa(target_pfa);
  const double energy = coefficient_energy(layout, a, range);
  if (!(energy > 0.0)) throw std::invalid_argument("detector coefficients are all zero");
  return model.sigma() * std::sqrt(energy) * q_inverse(target_pfa);
}

double threshold_for_pfa_mc(const CoefficientLayout& layout, std::span<const double> a,
                            const NoiseModel& model, double target_pfa, std::size_t trials,
                            std::uint64_t seed, SumRange range) {
  check_pfa(target_pfa);
  if (static_cast<double>(trials) * target_pfa < 100.0 - 1e-9) {
    throw std::invalid_argument("too few trials for the requested pfa (need trials * pfa >= 100)");
  }
  if (!(coefficient_energy(layout, a, range) > 0.0)) {
    throw std::invalid_argument("detector coefficients are all zero");
  }
  std::vector<double> weights(a.begin(), a.end());
  const Statistic stat = [&layout, weights, range](std::span<const double> d) {
    return linear_statistic(layout, weights, d, range);
  };
  auto scores = evaluate_noise(layout, model, trials, seed, std::span(&stat, 1));
  return upper_quantile(std::move(scores.front()), target_pfa);
}

LinearDetector calibrate_analytic(const LinearDetector& det, const NoiseModel& model) {
  const double vt = threshold_for_pfa_analytic(det.layout(), det.coefficients(), model,
                                               det.target_pfa(), det.range());
  return det.with_threshold(vt, {CalibrationMethod::analytic, 0, 0});
}

LinearDetector calibrate_mc(const LinearDetector& det, const NoiseModel& model, std::size_t trials,
                            std::uint64_t seed) {
  const double vt = threshold_for_pfa_mc(det.layout(), det.coefficients(), model, det.target_pfa(),
                                         trials, seed, det.range());
  return det.with_threshold(vt, {CalibrationMethod::monte_carlo, trials, seed});
}

PdEstimate estimate_pd(const LinearDetector& det, const SampledSignal& pulse, double snr_db,
                       const NoiseModel& model, std::size_t trials, std::uint64_t seed) {
  check_pd_trials(trials);
  const Statistic stat = [&det](std::span<const double> d) { return det.score(d); };
  const auto scores =
      evaluate_observations(det.layout(), pulse, snr_db, model, trials, seed, std::span(&stat, 1));
  return pd_from_scores(scores.front(), det.threshold());
}

double max_abs_coefficient(const CoefficientLayout& layout, std::span<const double> d,
                           SumRange range) {
  check_sizes(layout, d, "detail vector");
  double best = 0.0;
  bool any = false;
  for (const auto& s : layout.segments) {
    for (std::size_t k = s.offset + range_begin(s, range); k < s.offset + s.length; ++k) {
      best = std::max(best, std::abs(d[k]));
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("summation range is empty");
  return best;
}

bool max_coeff_baseline(const DetailCoefficients& d, double threshold, SumRange range) {
  return max_abs_coefficient(d.layout, d.values, range) > threshold;
}

MaxCoefficientDetector calibrate_max_coeff(const CoefficientLayout& layout, const NoiseModel& model,
                                           double target_pfa, std::size_t trials,
                                           std::uint64_t seed, SumRange range) {
  check_pfa(target_pfa);
  if (layout.range_size(range) == 0) throw std::invalid_argument("summation range is empty");
  MaxCoefficientDetector det{layout, 0.0, target_pfa, {CalibrationMethod::monte_carlo, trials, seed},
                             range};
  const Statistic stat = [&det](std::span<const double> d) { return det.score(d); };
  auto scores = evaluate_noise(layout, model, trials, seed, std::span(&stat, 1));
  det.threshold = upper_quantile(std::move(scores.front()), target_pfa);
  return det;
}

PdEstimate estimate_pd(const MaxCoefficientDetector& det, const SampledSignal& pulse,
                       double snr_db, const NoiseModel& model, std::size_t trials,
                       std::uint64_t seed) {
  check_pd_trials(trials);
  const Statistic stat = [&det](std::span<const double> d) { return det.score(d); };
  const auto scores =
      evaluate_observations(det.layout, pulse, snr_db, model, trials, seed, std::span(&stat, 1));
  return pd_from_scores(scores.front(), det.threshold);
}

std::vector<double> make_snr_grid(double snr_min, double snr_max, double step) {
  if (!(step > 0.0) || snr_max < snr_min) throw std::invalid_argument("invalid SNR grid");
  std::vector<double> grid;
  const double slack = step * 1e-6;
  for (std::size_t i = 0;; ++i) {
    const double snr = snr_min + static_cast<double>(i) * step;
    if (snr > snr_max + slack) break;
    grid.push_back(snr);
  }
  return grid;
}

DetectionCurve sweep_curve(const LinearDetector& det, const SampledSignal& pulse,
                           std::span<const double> snr_grid, const NoiseModel& model,
                           std::size_t trials, std::uint64_t seed, std::string detector_id) {
  return sweep(det, det.target_pfa(), pulse, snr_grid, model, trials, seed, std::move(detector_id));
}

DetectionCurve sweep_curve(const MaxCoefficientDetector& det, const SampledSignal& pulse,
                           std::span<const double> snr_grid, const NoiseModel& model,
                           std::size_t trials, std::uint64_t seed, std::string detector_id) {
  return sweep(det, det.target_pfa, pulse, snr_grid, model, trials, seed, std::move(detector_id));
}

DetectionCurve analytic_curve(const LinearDetector& det, const DetailCoefficients& pulse_details,
                              std::span<const double> snr_grid, const NoiseModel& model,
                              std::string detector_id) {
  if (snr_grid.empty()) throw std::invalid_argument("SNR grid is empty");
  if (!(pulse_details.layout == det.layout())) {
    throw std::invalid_argument("pulse layout does not match the detector layout");
  }
  DetectionCurve curve{det.target_pfa(), {}, std::move(detector_id), 0, 0};
  for (double snr : snr_grid) {
    const auto stats = analytic_stats(pulse_details, det.coefficients(), snr, model,
                                      det.threshold(), det.range());
    curve.points.push_back({snr, stats.pd, 0.0});
  }
  return curve;
}

}  // namespace wavedet
