#include "wavedet/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wavedet {

WaveletFilterPair::WaveletFilterPair(std::string family, std::vector<double> lowpass)
    : family_(std::move(family)), lowpass_(std::move(lowpass)) {
  const std::size_t len = lowpass_.size();
  if (len < 2 || len % 2 != 0) {
    throw std::invalid_argument("filter length must be even and at least 2");
  }
  highpass_.resize(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    highpass_[n] = sign * lowpass_[len - 1 - n];
  }

  const double sum = std::accumulate(lowpass_.begin(), lowpass_.end(), 0.0);
  if (std::abs(sum - std::sqrt(2.0)) > 1e-10) {
    throw std::invalid_argument("low-pass filter taps do not sum to sqrt(2)");
  }
  const double energy = std::inner_product(lowpass_.begin(), lowpass_.end(), lowpass_.begin(), 0.0);
  if (std::abs(energy - 1.0) > 1e-12) {
    throw std::invalid_argument("low-pass filter is not unit energy");
  }
  for (std::size_t shift = 2; shift < len; shift += 2) {
    double acc = 0.0;
    for (std::size_t n = 0; n + shift < len; ++n) acc += lowpass_[n] * lowpass_[n + shift];
    if (std::abs(acc) > 1e-10) {
      throw std::invalid_argument("low-pass filter is not orthogonal to its even shifts");
    }
  }
}

WaveletFilterPair filters_by_name(std::string_view family) {
  if (family == "haar") return db_filters(1);
  if (family.size() > 2 && family.substr(0, 2) == "db") {
    const std::string digits(family.substr(2));
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return db_filters(std::stoi(digits));
    }
  }
  throw std::invalid_argument("unknown wavelet family: " + std::string(family));
}

std::string_view range_name(SumRange range) {
  return range == SumRange::steady ? "steady" : "full";
}

SumRange range_from_name(std::string_view name) {
  if (name == "steady") return SumRange::steady;
  if (name == "full") return SumRange::full;
  throw std::invalid_argument("unknown summation range: " + std::string(name));
}

std::size_t CoefficientLayout::size() const noexcept {
  std::size_t total = 0;
  for (const auto& s : segments) total += s.length;
  return total;
}

std::size_t CoefficientLayout::range_size(SumRange range) const noexcept {
  std::size_t total = 0;
  for (const auto& s : segments) {
    total += range == SumRange::steady ? s.length - s.steady_start : s.length;
  }
  return total;
}

std::vector<int> CoefficientLayout::scales() const {
  std::vector<int> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.scale);
  return out;
}

int CoefficientLayout::max_scale() const noexcept {
  int top = 0;
  for (const auto& s : segments) top = std::max(top, s.scale);
  return top;
}

CoefficientLayout make_layout(const WaveletFilterPair& filters, std::size_t source_length,
                              std::span<const int> scales) {
  const int depth = log2_length(source_length);
  if (scales.empty()) throw std::invalid_argument("scale set is empty");
  CoefficientLayout layout{filters.family(), source_length, {}};
  std::size_t offset = 0;
  for (int scale : scales) {
    if (scale < 1 || scale > depth) {
      throw std::invalid_argument("scale " + std::to_string(scale) + " outside [1, " +
                                  std::to_string(depth) + "]");
    }
    for (const auto& s : layout.segments) {
      if (s.scale == scale) throw std::invalid_argument("scale repeated in scale set");
    }
    const std::size_t length = source_length >> scale;
    layout.segments.push_back({scale, offset, length, std::min(filters.length(), length)});
    offset += length;
  }
  return layout;
}

std::vector<double> gather_range(const CoefficientLayout& layout, std::span<const double> values,
                                 SumRange range) {
  if (values.size() != layout.size()) throw std::invalid_argument("vector does not match layout");
  std::vector<double> out;
  out.reserve(layout.range_size(range));
  for (const auto& s : layout.segments) {
    const std::size_t first = range == SumRange::steady ? s.steady_start : 0;
    out.insert(out.end(), values.begin() + static_cast<std::ptrdiff_t>(s.offset + first),
               values.begin() + static_cast<std::ptrdiff_t>(s.offset + s.length));
  }
  return out;
}

std::vector<double> scatter_range(const CoefficientLayout& layout, std::span<const double> compact,
                                  SumRange range) {
  if (compact.size() != layout.range_size(range)) {
    throw std::invalid_argument("compact vector does not match layout range");
  }
  std::vector<double> out(layout.size(), 0.0);
  std::size_t next = 0;
  for (const auto& s : layout.segments) {
    const std::size_t first = range == SumRange::steady ? s.steady_start : 0;
    for (std::size_t k = first; k < s.length; ++k) out[s.offset + k] = compact[next++];
  }
  return out;
}

std::uint64_t analysis_step(std::span<const double> x, const WaveletFilterPair& filters,
                            std::span<double> approx, std::span<double> detail) {
  const std::size_t len = x.size();
  const std::size_t half = len / 2;
  if (len < 2 || len % 2 != 0 || approx.size() != half || detail.size() != half) {
    throw std::invalid_argument("analysis_step: bad buffer sizes");
  }
  const auto h = filters.lowpass();
  const auto g = filters.highpass();
  const std::size_t taps = h.size();

  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t centre = 2 * k;
    double a = 0.0;
    double d = 0.0;
    if (centre + 1 >= taps) {
      // No wrap-around: x[centre - n] for n in [0, taps).
      const double* xp = x.data() + centre;
      for (std::size_t n = 0; n < taps; ++n) {
        a += h[n] * xp[-static_cast<std::ptrdiff_t>(n)];
        d += g[n] * xp[-static_cast<std::ptrdiff_t>(n)];
      }
    } else {
      for (std::size_t n = 0; n < taps; ++n) {
        const std::size_t back = n % len;
        const std::size_t idx = centre >= back ? centre - back : centre + len - back;
        a += h[n] * x[idx];
        d += g[n] * x[idx];
      }
    }
    approx[k] = a;
    detail[k] = d;
  }
  return 2ULL * half * taps;
}

Decomposition decompose(std::span<const double> x, const WaveletFilterPair& filters, int levels,
                        std::size_t source_length_hint) {
  const int depth = log2_length(x.size());
  if (levels < 1 || levels > depth) {
    throw std::invalid_argument("decomposition depth " + std::to_string(levels) +
                                " not in [1, " + std::to_string(depth) + "]");
  }
  const std::size_t source_length = source_length_hint ? source_length_hint : x.size();
  Decomposition out;
  std::vector<double> running(x.begin(), x.end());
  for (int level = 1; level <= levels; ++level) {
    const std::size_t half = running.size() / 2;
    std::vector<double> approx(half);
    DetailCoefficients detail;
    detail.values.resize(half);
    analysis_step(running, filters, approx, detail.values);
    const int scale[] = {level};
    detail.layout = make_layout(filters, source_length, scale);
    out.details.push_back(std::move(detail));
    running = std::move(approx);
  }
  out.approximation = std::move(running);
  return out;
}

std::vector<DetailCoefficients> dwt_details(const SampledSignal& x, const WaveletFilterPair& filters,
                                            int max_level) {
  return decompose(x.samples(), filters, max_level).details;
}

DetailCoefficients concat_scales(std::span<const DetailCoefficients> details,
                                 std::span<const int> scales) {
  if (details.empty()) throw std::invalid_argument("no detail vectors to concatenate");
  const auto& reference = details.front().layout;
  for (const auto& d : details) {
    if (d.layout.source_length != reference.source_length || d.layout.family != reference.family) {
      throw std::invalid_argument("detail vectors come from different sources");
    }
  }

  DetailCoefficients out;
  out.layout = {reference.family, reference.source_length, {}};
  for (int scale : scales) {
    const DetailCoefficients* found = nullptr;
    const ScaleSegment* segment = nullptr;
    for (const auto& d : details) {
      for (const auto& s : d.layout.segments) {
        if (s.scale == scale) {
          found = &d;
          segment = &s;
        }
      }
    }
    if (found == nullptr) {
      throw std::invalid_argument("scale " + std::to_string(scale) + " not present");
    }
    for (const auto& s : out.layout.segments) {
      if (s.scale == scale) throw std::invalid_argument("scale repeated in scale set");
    }
    ScaleSegment placed = *segment;
    placed.offset = out.values.size();
    out.layout.segments.push_back(placed);
    const auto first = found->values.begin() + static_cast<std::ptrdiff_t>(segment->offset);
    out.values.insert(out.values.end(), first, first + static_cast<std::ptrdiff_t>(segment->length));
  }
  if (out.layout.segments.empty()) throw std::invalid_argument("scale set is empty");
  return out;
}

ScaleTransform::ScaleTransform(WaveletFilterPair filters, std::size_t source_length,
                               std::vector<int> scales)
    : filters_(std::move(filters)), layout_(make_layout(filters_, source_length, scales)) {
  const int top = layout_.max_scale();
  level_details_.resize(static_cast<std::size_t>(top));
  for (int level = 1; level <= top; ++level) {
    level_details_[static_cast<std::size_t>(level - 1)].resize(source_length >> level);
  }
  approx_a_.resize(source_length / 2);
  approx_b_.resize(source_length / 2);
}

ScaleTransform::ScaleTransform(const CoefficientLayout& layout)
    : ScaleTransform(filters_by_name(layout.family), layout.source_length, layout.scales()) {}

void ScaleTransform::apply(std::span<const double> x, std::span<double> out) {
  if (x.size() != layout_.source_length || out.size() != layout_.size()) {
    throw std::invalid_argument("ScaleTransform::apply: size mismatch");
  }
  std::span<const double> running = x;
  std::vector<double>* next = &approx_a_;
  std::vector<double>* spare = &approx_b_;
  const int top = layout_.max_scale();
  for (int level = 1; level <= top; ++level) {
    const std::size_t half = running.size() / 2;
    std::span<double> approx(next->data(), half);
    multiply_adds_ += analysis_step(running, filters_, approx,
                                    level_details_[static_cast<std::size_t>(level - 1)]);
    running = approx;
    std::swap(next, spare);
  }
  for (const auto& s : layout_.segments) {
    const auto& src = level_details_[static_cast<std::size_t>(s.scale - 1)];
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(s.offset));
  }
}

}  // namespace wavedet
