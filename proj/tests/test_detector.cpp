#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "wavedet/detector.hpp"
#include "wavedet/gaussian.hpp"
#include "wavedet/montecarlo.hpp"
#include "wavedet/optimum.hpp"
#include "wavedet/rng.hpp"

using namespace wavedet;

namespace {

const WaveletFilterPair& db5() {
  static const auto f = db_filters(5);
  return f;
}

DetailCoefficients chirp_details(std::vector<int> scales) {
  const auto pulse = make_chirp(ChirpSpec{});
  return concat_scales(dwt_details(pulse, db5(), 6), scales);
}

// Standard error of an empirical upper quantile, in units of the statistic's sigma.
double quantile_se(double pfa, std::size_t n) {
  return std::sqrt(pfa * (1.0 - pfa) / static_cast<double>(n)) / oracle::normal_density(q_inverse(pfa));
}

}  // namespace

TEST_SUITE("detector") {
  TEST_CASE("Q function against quadrature") {
    for (double x : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0902323061678, 4.0, 6.0}) {
      CAPTURE(x);
      CHECK(q_function(x) == doctest::Approx(oracle::q_simpson(x)).epsilon(1e-10));
    }
    CHECK(q_function(0.0) == 0.5);
  }

  TEST_CASE("Q inverse at the operating point") {
    const double oracle_value = oracle::q_inverse_simpson(1e-3);
    CHECK(q_inverse(1e-3) == doctest::Approx(oracle_value).epsilon(1e-9));
    CHECK(std::abs(q_inverse(1e-3) - 3.0902) < 1e-4);
    for (double p : {1e-8, 1e-5, 0.01, 0.3, 0.5, 0.9}) {
      CHECK(q_function(q_inverse(p)) == doctest::Approx(p).epsilon(1e-9));
    }
    CHECK_THROWS(q_inverse(0.0));
    CHECK_THROWS(q_inverse(1.0));
  }

  TEST_CASE("upper quantile picks the expected order statistic") {
    std::vector<double> v(100000);
    std::iota(v.begin(), v.end(), 1.0);
    std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
    // ceil((1 - 1e-3) * 1e5) = 99900th smallest.
    CHECK(upper_quantile(v, 1e-3) == 99900.0);
    CHECK(exceed_fraction(v, 99900.0) == doctest::Approx(1e-3));
    CHECK(upper_quantile(v, 1e-2) == 99000.0);
    CHECK_THROWS(upper_quantile(std::vector<double>(99999, 0.0), 1e-3));
  }

  TEST_CASE("exceedance is strict") {
    const std::vector<double> v = {1.0, 2.0, 2.0, 3.0};
    CHECK(exceed_fraction(v, 2.0) == 0.25);
    CHECK(exceed_fraction(v, 0.0) == 1.0);
    CHECK(binomial_stderr(0.5, 100) == doctest::Approx(0.05));
  }

  TEST_CASE("analytic statistics of a linear detector") {
    const auto d = chirp_details({4});
    const NoiseModel model(2.0);
    std::vector<double> a(d.values.size(), 0.0);
    RandomStream rng(5);
    for (auto& v : a) v = rng.gaussian();
    const double energy = coefficient_energy(d.layout, a);
    double dot = 0.0;
    for (std::size_t k = d.layout.segments[0].steady_start; k < a.size(); ++k) dot += a[k] * d.values[k];
    const double vt = threshold_for_pfa_analytic(d.layout, a, model, 1e-3);
    CHECK(vt == doctest::Approx(2.0 * std::sqrt(energy) * oracle::q_inverse_simpson(1e-3)).epsilon(1e-9));
    const auto st = analytic_stats(d, a, -6.0, model, vt);
    CHECK(st.sigma_v == doctest::Approx(2.0 * std::sqrt(energy)));
    CHECK(st.eta_h1 == doctest::Approx(std::pow(10.0, -0.3) * 4.0 * dot));
    CHECK(st.pfa == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(st.pd == doctest::Approx(oracle::q_simpson((vt - st.eta_h1) / st.sigma_v)).epsilon(1e-9));
  }

  TEST_CASE("statistic ignores the transient region") {
    const auto d = chirp_details({5, 6});
    std::vector<double> a(d.values.size(), 1.0);
    auto noisy = d.values;
    for (const auto& s : d.layout.segments) {
      for (std::size_t k = 0; k < s.steady_start; ++k) noisy[s.offset + k] = 1e6;
    }
    CHECK(linear_statistic(d.layout, a, noisy) == doctest::Approx(linear_statistic(d.layout, a, d.values)));
    CHECK(linear_statistic(d.layout, a, noisy, SumRange::full) > 1e6);
  }

  TEST_CASE("detector validation") {
    const auto d = chirp_details({4});
    CHECK_THROWS(LinearDetector(d.layout, std::vector<double>(3, 1.0), 0.0, 1e-3));
    CHECK_THROWS(LinearDetector(d.layout, std::vector<double>(d.values.size(), 0.0), 0.0, 1e-3));
    CHECK_THROWS(LinearDetector(d.layout, d.values, 0.0, 0.0));
    CHECK_THROWS(LinearDetector(d.layout, d.values, std::nan(""), 1e-3));
    // Non-zero only in the transient region is still zero over the summation range.
    std::vector<double> transient(d.values.size(), 0.0);
    transient[0] = 1.0;
    CHECK_THROWS(LinearDetector(d.layout, transient, 0.0, 1e-3));
    const LinearDetector det(d.layout, d.values, 1.0, 1e-3);
    CHECK(det.detect(std::vector<double>(d.values.size(), 0.0)) == false);
    CHECK_THROWS(statistic(chirp_details({5}), det));
  }

  TEST_CASE("noise statistics match the Gaussian model") {
    const auto d = chirp_details({4});
    const NoiseModel model(1.7);
    const auto det = optimum_a(d, 1e-3, model, 0.0);
    const std::size_t trials = 4000;
    const std::size_t steady = d.layout.range_size(SumRange::steady);
    const std::vector<Statistic> stats = {
        [&](std::span<const double> v) {
          double s = 0.0;
          for (double x : gather_range(d.layout, v, SumRange::steady)) s += x * x;
          return s;
        },
        [&](std::span<const double> v) { return det.score(v); },
    };
    const auto out = evaluate_noise(d.layout, model, trials, 77, stats);
    const double pooled =
        std::accumulate(out[0].begin(), out[0].end(), 0.0) / static_cast<double>(trials * steady);
    const double df = static_cast<double>(trials * steady);
    CHECK(std::abs(pooled / (1.7 * 1.7) - 1.0) < 3.0 * std::sqrt(2.0 / df));
    double var = 0.0;
    for (double v : out[1]) var += v * v;
    var /= static_cast<double>(trials);
    CHECK(std::abs(var / (1.7 * 1.7) - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(trials)));
  }

  TEST_CASE("Monte Carlo threshold agrees with the analytic one") {
    const auto d = chirp_details({5});
    const NoiseModel model(1.0);
    const auto det = optimum_a(d, 1e-2, model, 0.0);
    const auto mc = calibrate_mc(det, model, 40000, 8);
    CHECK(mc.calibration().method == CalibrationMethod::monte_carlo);
    CHECK(mc.calibration().trials == 40000);
    CHECK(std::abs(mc.threshold() - det.threshold()) < 4.0 * quantile_se(1e-2, 40000));
    CHECK_THROWS(calibrate_mc(det, model, 9999, 8));
  }

  TEST_CASE("Monte Carlo Pd tracks the analytic curve") {
    const auto d = chirp_details({6});
    const auto pulse = make_chirp(ChirpSpec{});
    const NoiseModel model(1.0);
    const auto det = optimum_a(d, 1e-3, model, 0.0);
    const auto grid = make_snr_grid(-6.0, 0.0, 2.0);
    const auto mc = sweep_curve(det, pulse, grid, model, 5000, 21, "opt");
    const auto th = analytic_curve(det, d, grid, model);
    REQUIRE(mc.points.size() == 4);
    CHECK(mc.trials_per_point == 5000);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const double se = binomial_stderr(th.points[p].pd, 5000);
      CHECK(std::abs(mc.points[p].pd - th.points[p].pd) < 4.0 * se + 1e-9);
      CHECK(th.points[p].pd_stderr == 0.0);
    }
    CHECK_THROWS(estimate_pd(det, pulse, 0.0, model, 99, 1));
    CHECK_THROWS(sweep_curve(det, pulse, std::vector<double>{0.0, 0.0}, model, 100, 1));
  }

  TEST_CASE("results do not depend on the worker count") {
    const auto d = chirp_details({4, 5});
    const auto pulse = make_chirp(ChirpSpec{});
    const NoiseModel model(1.0);
    const auto det = optimum_a(d, 1e-3, model, 0.0);
    const auto grid = make_snr_grid(-12.0, -10.0, 1.0);
    const unsigned saved = worker_threads();
    set_worker_threads(1);
    const auto a = sweep_curve(det, pulse, grid, model, 600, 4);
    const auto ta = calibrate_mc(det, model, 100000, 4).threshold();
    set_worker_threads(3);
    const auto b = sweep_curve(det, pulse, grid, model, 600, 4);
    const auto tb = calibrate_mc(det, model, 100000, 4).threshold();
    set_worker_threads(saved);
    for (std::size_t p = 0; p < grid.size(); ++p) CHECK(a.points[p].pd == b.points[p].pd);
    CHECK(ta == tb);
  }

  TEST_CASE("max-coefficient baseline threshold") {
    // max over m independent |N(0, 1)| exceeds t with probability 1 - (1 - 2 Q(t))^m.
    const auto d = chirp_details({6});
    const NoiseModel model(1.0);
    const double pfa = 1e-2;
    const auto m = static_cast<double>(d.layout.range_size(SumRange::steady));
    const double per = 0.5 * (1.0 - std::pow(1.0 - pfa, 1.0 / m));
    const double expected = oracle::q_inverse_simpson(per);
    const auto base = calibrate_max_coeff(d.layout, model, pfa, 50000, 12);
    // Delta method: density of the max at the quantile.
    const double density = m * std::pow(1.0 - 2.0 * per, m - 1.0) * 2.0 * oracle::normal_density(expected);
    const double se = std::sqrt(pfa * (1.0 - pfa) / 50000.0) / density;
    CHECK(std::abs(base.threshold - expected) < 4.0 * se);
    CHECK(max_coeff_baseline(d, 0.0) == true);
    CHECK(max_abs_coefficient(d.layout, d.values, SumRange::steady) <=
          max_abs_coefficient(d.layout, d.values, SumRange::full));
  }

  TEST_CASE("SNR grid") {
    const auto g = make_snr_grid(-15.0, 0.0, 1.0);
    CHECK(g.size() == 16);
    CHECK(g.front() == -15.0);
    CHECK(g.back() == 0.0);
    CHECK(make_snr_grid(0.0, 1.0, 0.3).size() == 4);
    CHECK_THROWS(make_snr_grid(0.0, 1.0, 0.0));
    CHECK_THROWS(make_snr_grid(1.0, 0.0, 1.0));
  }
}
