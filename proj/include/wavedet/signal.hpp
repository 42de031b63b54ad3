#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace wavedet {

/// What a sample vector represents under the two-hypothesis model.
enum class SignalKind {
  noise,           // H0: noise alone
  observation,     // H1: scaled pulse plus noise
  pulse_template,  // the known pulse, unit empirical power
};

/// File-format name of a kind: "noise", "observation" or "chirp".
std::string_view kind_name(SignalKind kind);
SignalKind kind_from_name(std::string_view name);

bool is_power_of_two(std::size_t n) noexcept;
/// log2 of a power-of-two length; throws otherwise.
int log2_length(std::size_t n);

/// Additive white Gaussian noise with standard deviation sigma.
class NoiseModel {
 public:
  explicit NoiseModel(double sigma = 1.0);
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

/// Power-of-two sample vector tagged with its hypothesis and provenance.
class SampledSignal {
 public:
  /// Throws std::invalid_argument if the length is not a power of two, or if
  /// a pulse template does not have unit empirical power (1e-12).
  SampledSignal(std::vector<double> samples, SignalKind kind,
                std::optional<double> snr_db = std::nullopt,
                std::optional<std::uint64_t> seed = std::nullopt);

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  int log2_size() const { return log2_length(samples_.size()); }
  SignalKind kind() const noexcept { return kind_; }
  std::optional<double> snr_db() const noexcept { return snr_db_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

 private:
  std::vector<double> samples_;
  SignalKind kind_;
  std::optional<double> snr_db_;
  std::optional<std::uint64_t> seed_;
};

/// Mean of squared samples.
double empirical_power(std::span<const double> x) noexcept;

struct ChirpSpec {
  std::size_t length = 1024;
  double f_start = 0.004;
  double f_end = 0.05;
};

/// Linear-frequency sweep from f_start to f_end (cycles/sample, both in
/// (0, 0.5)) over the whole vector, rescaled to unit empirical power.
SampledSignal make_chirp(std::size_t length, double f_start, double f_end);
inline SampledSignal make_chirp(const ChirpSpec& spec) {
  return make_chirp(spec.length, spec.f_start, spec.f_end);
}

/// Pulse amplitude under H1: 10^(snr_db/20) * sigma^2.
///
/// The sigma^2 factor follows the hypothesis model literally; with the
/// default sigma = 1 it coincides with the power-ratio convention.
double pulse_amplitude(double snr_db, const NoiseModel& model) noexcept;

void fill_noise(std::span<double> out, const NoiseModel& model, std::uint64_t seed);

SampledSignal make_noise(std::size_t length, const NoiseModel& model, std::uint64_t seed);

/// amplitude * pulse + noise, the noise drawn exactly as make_noise(seed) would.
SampledSignal make_observation(const SampledSignal& pulse, double snr_db,
                               const NoiseModel& model, std::uint64_t seed);

}  // namespace wavedet
