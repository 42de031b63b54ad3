#pragma once

namespace wavedet {

/// Standard Gaussian upper tail Q(x) = P(Z > x), via erfc.
double q_function(double x) noexcept;

/// Q^{-1}(p) for p in (0, 1), by bisection on q_function to 1e-10 or better.
double q_inverse(double p);

/// Standard normal density.
double normal_pdf(double x) noexcept;

}  // namespace wavedet
