#include "wavedet/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wavedet {

double q_function(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("q_inverse: p must lie in (0, 1)");
  double lo = -40.0;  // Q(lo) = 1
  double hi = 40.0;   // Q(hi) = 0
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (q_function(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace wavedet
