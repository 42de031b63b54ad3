#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace wavedet {

/// Identity of the generator stack, recorded in every output file.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64-substreams+box-muller";

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of child stream `index` under `parent`.
///
/// Derivation is a pure function of the pair, so Monte Carlo trial `t` sees the
/// same numbers whether trials run sequentially, in parallel, or out of order.
std::uint64_t substream_seed(std::uint64_t parent, std::uint64_t index) noexcept;

/// Gaussian / uniform source over a 64-bit Mersenne Twister.
///
/// Normals come from the basic Box-Muller transform (both outputs used), so a
/// given seed yields bit-identical sequences within this implementation.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Uniform on (0, 1].
  double uniform();
  double gaussian();
  void fill_gaussian(std::span<double> out, double sigma);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wavedet
