#include "wavedet/rng.hpp"

#include <cmath>
#include <numbers>

namespace wavedet {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index ^ 0xD1B54A32D192ED03ULL));
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

double RandomStream::uniform() {
  // 53 random mantissa bits, shifted into (0, 1] so log() below is finite.
  constexpr double kScale = 1.0 / 9007199254740992.0;
  return static_cast<double>((engine_() >> 11) + 1) * kScale;
}

double RandomStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void RandomStream::fill_gaussian(std::span<double> out, double sigma) {
  for (double& v : out) v = sigma * gaussian();
}

}  // namespace wavedet
