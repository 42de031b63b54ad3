#include "wavedet/signal.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wavedet/rng.hpp"

namespace wavedet {

std::string_view kind_name(SignalKind kind) {
  switch (kind) {
    case SignalKind::noise:
      return "noise";
    case SignalKind::observation:
      return "observation";
    case SignalKind::pulse_template:
      return "chirp";
  }
  return "unknown";
}

SignalKind kind_from_name(std::string_view name) {
  if (name == "noise") return SignalKind::noise;
  if (name == "observation") return SignalKind::observation;
  if (name == "chirp" || name == "pulse") return SignalKind::pulse_template;
  throw std::invalid_argument("unknown signal kind: " + std::string(name));
}

bool is_power_of_two(std::size_t n) noexcept { return std::has_single_bit(n); }

int log2_length(std::size_t n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("length " + std::to_string(n) + " is not a power of two");
  }
  return std::countr_zero(n);
}

NoiseModel::NoiseModel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("noise sigma must be positive and finite");
  }
}

double empirical_power(std::span<const double> x) noexcept {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

SampledSignal::SampledSignal(std::vector<double> samples, SignalKind kind,
                             std::optional<double> snr_db, std::optional<std::uint64_t> seed)
    : samples_(std::move(samples)), kind_(kind), snr_db_(snr_db), seed_(seed) {
  log2_length(samples_.size());
  if (kind_ == SignalKind::pulse_template &&
      std::abs(empirical_power(samples_) - 1.0) > 1e-12) {
    throw std::invalid_argument("pulse template must have unit empirical power");
  }
}

SampledSignal make_chirp(std::size_t length, double f_start, double f_end) {
  log2_length(length);
  auto in_band = [](double f) { return f > 0.0 && f < 0.5; };
  if (!in_band(f_start) || !in_band(f_end)) {
    throw std::invalid_argument("chirp frequencies must lie in (0, 0.5)");
  }
  if (f_start == f_end) throw std::invalid_argument("chirp needs f_start != f_end");
  if (length < 2) throw std::invalid_argument("chirp needs at least two samples");

  // Instantaneous frequency f_start + (f_end - f_start) * t / (length - 1).
  const double span = static_cast<double>(length - 1);
  const double rate = (f_end - f_start) / span;
  std::vector<double> x(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i);
    x[i] = std::sin(2.0 * std::numbers::pi * (f_start * t + 0.5 * rate * t * t));
  }
  const double scale = 1.0 / std::sqrt(empirical_power(x));
  for (double& v : x) v *= scale;
  return SampledSignal(std::move(x), SignalKind::pulse_template);
}

double pulse_amplitude(double snr_db, const NoiseModel& model) noexcept {
  return std::pow(10.0, snr_db / 20.0) * model.sigma() * model.sigma();
}

void fill_noise(std::span<double> out, const NoiseModel& model, std::uint64_t seed) {
  RandomStream rng(seed);
  rng.fill_gaussian(out, model.sigma());
}

SampledSignal make_noise(std::size_t length, const NoiseModel& model, std::uint64_t seed) {
  log2_length(length);
  std::vector<double> x(length);
  fill_noise(x, model, seed);
  return SampledSignal(std::move(x), SignalKind::noise, std::nullopt, seed);
}

SampledSignal make_observation(const SampledSignal& pulse, double snr_db,
                               const NoiseModel& model, std::uint64_t seed) {
  if (pulse.kind() != SignalKind::pulse_template) {
    throw std::invalid_argument("make_observation expects a unit-power pulse template");
  }
  std::vector<double> x(pulse.size());
  fill_noise(x, model, seed);
  const double amplitude = pulse_amplitude(snr_db, model);
  const auto s = pulse.samples();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += amplitude * s[i];
  return SampledSignal(std::move(x), SignalKind::observation, snr_db, seed);
}

}  // namespace wavedet
