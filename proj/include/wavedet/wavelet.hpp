#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavedet/signal.hpp"

namespace wavedet {

/// Orthonormal two-channel analysis pair (h low-pass, g high-pass).
///
/// Invariants, checked on construction: sum h^2 = sum g^2 = 1 (1e-12),
/// g[n] = (-1)^n h[L-1-n], and sum_n h[n] h[n+2k] = delta(k) (1e-10).
class WaveletFilterPair {
 public:
  WaveletFilterPair(std::string family, std::vector<double> lowpass);

  const std::string& family() const noexcept { return family_; }
  std::span<const double> lowpass() const noexcept { return lowpass_; }
  std::span<const double> highpass() const noexcept { return highpass_; }
  std::size_t length() const noexcept { return lowpass_.size(); }

 private:
  std::string family_;
  std::vector<double> lowpass_;
  std::vector<double> highpass_;
};

/// Daubechies analysis pair with `order` vanishing moments, L = 2 * order.
/// Supported orders are 1..10; order 1 is the Haar pair.
WaveletFilterPair db_filters(int order);

/// "haar" or "db1".."db10".
WaveletFilterPair filters_by_name(std::string_view family);

/// Which part of each scale segment a statistic sums over.
///
/// `steady` starts at index L of every segment, where the filter has left the
/// boundary transient; `full` covers the whole segment and exists for
/// sensitivity studies only.
enum class SumRange { steady, full };

std::string_view range_name(SumRange range);
SumRange range_from_name(std::string_view name);

struct ScaleSegment {
  int scale = 0;
  std::size_t offset = 0;
  std::size_t length = 0;        // 2^(N - scale)
  std::size_t steady_start = 0;  // filter length L, clamped to `length`

  bool operator==(const ScaleSegment&) const = default;
};

/// Where each scale's detail vector sits inside a (possibly concatenated)
/// coefficient vector, plus what produced it.
struct CoefficientLayout {
  std::string family;
  std::size_t source_length = 0;
  std::vector<ScaleSegment> segments;

  std::size_t size() const noexcept;
  std::size_t range_size(SumRange range) const noexcept;
  std::vector<int> scales() const;
  int max_scale() const noexcept;

  bool operator==(const CoefficientLayout&) const = default;
};

/// Layout of d_B for scale set `scales` (in the given order).
/// Throws if any scale is outside [1, log2(source_length)] or repeated.
CoefficientLayout make_layout(const WaveletFilterPair& filters, std::size_t source_length,
                              std::span<const int> scales);

/// Detail coefficients d_i, or a concatenation d_B over several scales.
struct DetailCoefficients {
  CoefficientLayout layout;
  std::vector<double> values;
};

/// Values inside the summation range, concatenated segment by segment.
std::vector<double> gather_range(const CoefficientLayout& layout, std::span<const double> values,
                                 SumRange range);
/// Inverse of gather_range: places `compact` into a full-layout vector, zeros elsewhere.
std::vector<double> scatter_range(const CoefficientLayout& layout, std::span<const double> compact,
                                  SumRange range);

/// One pyramid step with periodic extension:
///   approx[k] = sum_n h[n] x[(2k - n) mod len],  detail[k] likewise with g.
/// Returns the number of multiply-adds performed.
std::uint64_t analysis_step(std::span<const double> x, const WaveletFilterPair& filters,
                            std::span<double> approx, std::span<double> detail);

struct Decomposition {
  std::vector<DetailCoefficients> details;  // levels 1..levels
  std::vector<double> approximation;        // approximation after the last level
};

Decomposition decompose(std::span<const double> x, const WaveletFilterPair& filters, int levels,
                        std::size_t source_length_hint = 0);

/// Detail vectors of levels 1..max_level of `x`.
std::vector<DetailCoefficients> dwt_details(const SampledSignal& x, const WaveletFilterPair& filters,
                                            int max_level);

/// d_B: the requested scales' vectors concatenated in the order of `scales`.
DetailCoefficients concat_scales(std::span<const DetailCoefficients> details,
                                 std::span<const int> scales);

/// Allocation-free d_B extraction for Monte Carlo loops.
///
/// Holds scratch buffers, so one instance must not be shared between threads.
class ScaleTransform {
 public:
  ScaleTransform(WaveletFilterPair filters, std::size_t source_length, std::vector<int> scales);
  explicit ScaleTransform(const CoefficientLayout& layout);

  const CoefficientLayout& layout() const noexcept { return layout_; }
  const WaveletFilterPair& filters() const noexcept { return filters_; }

  /// Writes d_B of `x` into `out` (size layout().size()).
  void apply(std::span<const double> x, std::span<double> out);

  /// Multiply-adds performed by all apply() calls so far.
  std::uint64_t multiply_adds() const noexcept { return multiply_adds_; }

 private:
  WaveletFilterPair filters_;
  CoefficientLayout layout_;
  std::vector<std::vector<double>> level_details_;
  std::vector<double> approx_a_;
  std::vector<double> approx_b_;
  std::uint64_t multiply_adds_ = 0;
};

}  // namespace wavedet
