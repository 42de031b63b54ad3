#include "wavedet/optimum.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wavedet/rng.hpp"

namespace wavedet {
namespace {

double dot(std::span<const double> x, std::span<const double> y) {
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

void normalize(std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  for (double& x : v) x /= norm;
}

}  // namespace

double deflection(const DetailCoefficients& pulse_details, std::span<const double> a,
                  double snr_db, const NoiseModel& model, SumRange range) {
  const double energy = coefficient_energy(pulse_details.layout, a, range);
  if (!(energy > 0.0)) throw std::invalid_argument("detector coefficients are all zero");
  const double projection = linear_statistic(pulse_details.layout, a, pulse_details.values, range);
  return pulse_amplitude(snr_db, model) * projection / (model.sigma() * std::sqrt(energy));
}

LinearDetector optimum_a(const DetailCoefficients& pulse_details, double target_pfa,
                         const NoiseModel& model, double snr_db, SumRange range) {
  (void)snr_db;  // the maximiser does not depend on it; see the header
  auto matched = gather_range(pulse_details.layout, pulse_details.values, range);
  if (!(dot(matched, matched) > 0.0)) {
    throw std::invalid_argument("pulse has no energy on the selected scales' summation range");
  }
  normalize(matched);
  auto a = scatter_range(pulse_details.layout, matched, range);
  const double vt =
      threshold_for_pfa_analytic(pulse_details.layout, a, model, target_pfa, range);
  return LinearDetector(pulse_details.layout, std::move(a), vt, target_pfa,
                        {CalibrationMethod::analytic, 0, 0}, range);
}

AscentResult numerical_optimum_a(const DetailCoefficients& pulse_details, double target_pfa,
                                 const NoiseModel& model, double snr_db, double tol,
                                 std::uint64_t seed, std::size_t max_iterations, SumRange range) {
  if (!(target_pfa > 0.0 && target_pfa < 1.0)) {
    throw std::invalid_argument("target pfa must lie in (0, 1)");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const auto d = gather_range(pulse_details.layout, pulse_details.values, range);
  const double d_norm = std::sqrt(dot(d, d));
  if (!(d_norm > 0.0)) {
    throw std::invalid_argument("pulse has no energy on the selected scales' summation range");
  }
  // deflection(a) = scale * (a . d) for unit a.
  const double scale = pulse_amplitude(snr_db, model) / model.sigma();

  RandomStream rng(seed);
  std::vector<double> a(d.size());
  for (double& x : a) x = rng.gaussian();
  normalize(a);

  auto objective = [&](const std::vector<double>& v) { return scale * dot(v, d); };
  double current = objective(a);
  // Inverse of the gradient's Lipschitz bound on the sphere.
  double step = 1.0 / (scale * d_norm);
  std::vector<double> grad(d.size());
  std::vector<double> trial(d.size());

  for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
    const double along = dot(a, d);
    for (std::size_t k = 0; k < d.size(); ++k) grad[k] = scale * (d[k] - along * a[k]);

    double next = current;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t k = 0; k < d.size(); ++k) trial[k] = a[k] + step * grad[k];
      normalize(trial);
      next = objective(trial);
      if (next >= current) break;
      step *= 0.5;
    }
    const double change = std::abs(next - current) / std::max(std::abs(current), 1e-300);
    if (next >= current) {
      a.swap(trial);
      current = next;
    }
    if (change < tol) {
      return {scatter_range(pulse_details.layout, a, range), current, iter};
    }
  }
  throw std::runtime_error("numerical_optimum_a did not converge");
}

}  // namespace wavedet
