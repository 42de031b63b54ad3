#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "wavedet/rng.hpp"
#include "wavedet/signal.hpp"

using namespace wavedet;

TEST_SUITE("signal") {
  TEST_CASE("power-of-two lengths") {
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(1024));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(1000));
    CHECK(log2_length(4096) == 12);
    CHECK_THROWS_AS(log2_length(96), std::invalid_argument);
  }

  TEST_CASE("chirp has unit empirical power and the requested sweep") {
    for (std::size_t n : {64u, 256u, 1024u, 4096u}) {
      const auto c = make_chirp(n, 0.01, 0.2);
      CHECK(c.kind() == SignalKind::pulse_template);
      CHECK(c.size() == n);
      CHECK(empirical_power(c.samples()) == doctest::Approx(1.0).epsilon(1e-13));
    }
    // Unnormalised samples follow sin(2 pi (f0 t + rate t^2 / 2)); compare shapes.
    const std::size_t n = 512;
    const double f0 = 0.02;
    const double f1 = 0.3;
    const auto c = make_chirp(n, f0, f1);
    const double rate = (f1 - f0) / static_cast<double>(n - 1);
    std::vector<double> ref(n);
    double power = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double tt = static_cast<double>(t);
      ref[t] = std::sin(2.0 * std::numbers::pi * (f0 * tt + 0.5 * rate * tt * tt));
      power += ref[t] * ref[t];
    }
    const double scale = std::sqrt(static_cast<double>(n) / power);
    for (std::size_t t = 0; t < n; ++t) CHECK(c.samples()[t] == doctest::Approx(ref[t] * scale).epsilon(1e-12));
  }

  TEST_CASE("chirp argument validation") {
    CHECK_THROWS_AS(make_chirp(1000, 0.01, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(make_chirp(1024, 0.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(make_chirp(1024, 0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_chirp(1024, 0.1, 0.1), std::invalid_argument);
  }

  TEST_CASE("sampled signal invariants") {
    CHECK_THROWS_AS(SampledSignal(std::vector<double>(100, 0.0), SignalKind::noise),
                    std::invalid_argument);
    CHECK_THROWS_AS(SampledSignal(std::vector<double>(8, 2.0), SignalKind::pulse_template),
                    std::invalid_argument);
    CHECK_NOTHROW(SampledSignal(std::vector<double>(8, 1.0), SignalKind::pulse_template));
    CHECK_THROWS_AS(NoiseModel(0.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseModel(-1.0), std::invalid_argument);
  }

  TEST_CASE("kind names") {
    CHECK(kind_name(SignalKind::pulse_template) == "chirp");
    CHECK(kind_from_name("noise") == SignalKind::noise);
    CHECK(kind_from_name("observation") == SignalKind::observation);
    CHECK_THROWS(kind_from_name("square"));
  }

  TEST_CASE("pulse amplitude") {
    const NoiseModel unit(1.0);
    CHECK(pulse_amplitude(0.0, unit) == doctest::Approx(1.0));
    CHECK(pulse_amplitude(-20.0, unit) == doctest::Approx(0.1));
    CHECK(pulse_amplitude(6.0, unit) == doctest::Approx(std::pow(10.0, 0.3)));
    CHECK(pulse_amplitude(0.0, NoiseModel(2.0)) == doctest::Approx(4.0));
  }

  TEST_CASE("noise is reproducible per seed and distinct across seeds") {
    const NoiseModel model(1.0);
    const auto a = make_noise(256, model, 42);
    const auto b = make_noise(256, model, 42);
    const auto c = make_noise(256, model, 43);
    CHECK(std::equal(a.samples().begin(), a.samples().end(), b.samples().begin()));
    CHECK_FALSE(std::equal(a.samples().begin(), a.samples().end(), c.samples().begin()));
    CHECK(a.seed() == 42u);
    CHECK(a.kind() == SignalKind::noise);
  }

  TEST_CASE("noise moments") {
    // Sample mean and variance of 2^18 draws against their sampling distributions.
    for (double sigma : {0.5, 1.0, 3.0}) {
      const NoiseModel model(sigma);
      const std::size_t n = 1u << 18;
      const auto x = make_noise(n, model, 7);
      double mean = 0.0;
      for (double v : x.samples()) mean += v;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (double v : x.samples()) var += v * v;
      var /= static_cast<double>(n);
      CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(static_cast<double>(n)));
      CHECK(std::abs(var / (sigma * sigma) - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
    }
  }

  TEST_CASE("observation is scaled pulse plus the seed's noise") {
    const NoiseModel model(1.5);
    const auto pulse = make_chirp(128, 0.01, 0.1);
    const auto obs = make_observation(pulse, -3.0, model, 9);
    const auto noise = make_noise(128, model, 9);
    const double amp = std::pow(10.0, -3.0 / 20.0) * 1.5 * 1.5;
    for (std::size_t i = 0; i < 128; ++i) {
      CHECK(obs.samples()[i] == doctest::Approx(noise.samples()[i] + amp * pulse.samples()[i]));
    }
    CHECK(obs.kind() == SignalKind::observation);
    CHECK(obs.snr_db() == -3.0);
  }

  TEST_CASE("substream seeds") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(substream_seed(5, i));
    CHECK(seen.size() == 1000);
    CHECK(substream_seed(5, 3) == substream_seed(5, 3));
    CHECK(substream_seed(5, 3) != substream_seed(6, 3));

    RandomStream r(1);
    for (int i = 0; i < 10000; ++i) {
      const double u = r.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u <= 1.0);
    }
  }
}
