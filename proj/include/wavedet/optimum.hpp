#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wavedet/detector.hpp"

namespace wavedet {

/// Deflection (eta_v / sigma_v) of coefficient vector `a` at snr_db:
/// A sum(a d_s) / (sigma_n sqrt(sum a^2)), sums over the summation range.
double deflection(const DetailCoefficients& pulse_details, std::span<const double> a,
                  double snr_db, const NoiseModel& model, SumRange range = SumRange::steady);

/// Coefficients maximising Pd at fixed Pfa under the white-Gaussian model.
///
/// Pd = Q(Q^{-1}(pfa) - deflection) is increasing in the deflection, and by
/// Cauchy-Schwarz the deflection is maximised by a proportional to the pulse's
/// own detail coefficients over the summation range. The result has unit norm
/// and an analytic threshold. snr_db scales the deflection but not the maximiser.
///
/// Throws if the pulse has no energy on the summation range.
LinearDetector optimum_a(const DetailCoefficients& pulse_details, double target_pfa,
                         const NoiseModel& model, double snr_db,
                         SumRange range = SumRange::steady);

struct AscentResult {
  std::vector<double> a;  // full layout, unit norm over the summation range
  double deflection = 0.0;
  std::size_t iterations = 0;
};

/// Projected gradient ascent of the deflection on the unit sphere, from a
/// random start drawn from `seed`. Stops once the relative objective change
/// falls below tol; throws std::runtime_error after max_iterations.
/// Intended as a cross-check of optimum_a, not for production use.
AscentResult numerical_optimum_a(const DetailCoefficients& pulse_details, double target_pfa,
                                 const NoiseModel& model, double snr_db, double tol,
                                 std::uint64_t seed = 1, std::size_t max_iterations = 100000,
                                 SumRange range = SumRange::steady);

}  // namespace wavedet
