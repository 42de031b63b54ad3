#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wavedet/signal.hpp"
#include "wavedet/wavelet.hpp"

namespace wavedet {

/// Scalar statistic of one coefficient vector (full layout, not compacted).
/// Must be safe to call concurrently.
using Statistic = std::function<double(std::span<const double>)>;

/// Values of every statistic over `trials` noise-only realizations, indexed
/// [statistic][trial]. Trial t draws its noise from substream_seed(seed, t), so
/// several statistics passed together see identical realizations.
std::vector<std::vector<double>> evaluate_noise(const CoefficientLayout& layout,
                                                const NoiseModel& model, std::size_t trials,
                                                std::uint64_t seed,
                                                std::span<const Statistic> statistics);

/// Same as evaluate_noise but on pulse-plus-noise observations at snr_db.
std::vector<std::vector<double>> evaluate_observations(const CoefficientLayout& layout,
                                                       const SampledSignal& pulse, double snr_db,
                                                       const NoiseModel& model, std::size_t trials,
                                                       std::uint64_t seed,
                                                       std::span<const Statistic> statistics);

/// The ceil((1 - pfa) * n)-th smallest value (1-based). Requires n * pfa >= 100.
double upper_quantile(std::vector<double> values, double pfa);

/// Fraction of values strictly greater than threshold.
double exceed_fraction(std::span<const double> values, double threshold) noexcept;

/// Binomial standard error sqrt(p (1 - p) / n).
double binomial_stderr(double p, std::size_t trials) noexcept;

/// Worker threads used by the evaluators (defaults to hardware concurrency).
/// Results never depend on this value.
void set_worker_threads(unsigned count) noexcept;
unsigned worker_threads() noexcept;

}  // namespace wavedet
