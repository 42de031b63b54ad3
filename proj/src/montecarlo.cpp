#include "wavedet/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "wavedet/rng.hpp"

namespace wavedet {
namespace {

std::atomic<unsigned> g_workers{0};

// Runs body(first, last) over contiguous chunks of [0, count). Each worker gets
// its own chunk, so per-trial state derived from the index is order-free.
template <typename Body>
void parallel_chunks(std::size_t count, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, worker_threads()), count));
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t first = w * chunk;
    const std::size_t last = std::min(count, first + chunk);
    pool.emplace_back([&, w, first, last] {
      try {
        if (first < last) body(first, last);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::vector<double>> evaluate(const CoefficientLayout& layout,
                                          const SampledSignal* pulse, double amplitude,
                                          const NoiseModel& model, std::size_t trials,
                                          std::uint64_t seed,
                                          std::span<const Statistic> statistics) {
  if (trials == 0) throw std::invalid_argument("Monte Carlo needs at least one trial");
  if (pulse != nullptr && pulse->size() != layout.source_length) {
    throw std::invalid_argument("pulse length does not match the coefficient layout");
  }
  std::vector<std::vector<double>> results(statistics.size(), std::vector<double>(trials));
  parallel_chunks(trials, [&](std::size_t first, std::size_t last) {
    ScaleTransform transform(layout);
    std::vector<double> x(layout.source_length);
    std::vector<double> d(layout.size());
    for (std::size_t t = first; t < last; ++t) {
      fill_noise(x, model, substream_seed(seed, t));
      if (pulse != nullptr) {
        const auto s = pulse->samples();
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += amplitude * s[i];
      }
      transform.apply(x, d);
      for (std::size_t k = 0; k < statistics.size(); ++k) results[k][t] = statistics[k](d);
    }
  });
  return results;
}

}  // namespace

void set_worker_threads(unsigned count) noexcept { g_workers = count; }

unsigned worker_threads() noexcept {
  const unsigned configured = g_workers.load();
  if (configured != 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::vector<double>> evaluate_noise(const CoefficientLayout& layout,
                                                const NoiseModel& model, std::size_t trials,
                                                std::uint64_t seed,
                                                std::span<const Statistic> statistics) {
  return evaluate(layout, nullptr, 0.0, model, trials, seed, statistics);
}

std::vector<std::vector<double>> evaluate_observations(const CoefficientLayout& layout,
                                                       const SampledSignal& pulse, double snr_db,
                                                       const NoiseModel& model, std::size_t trials,
                                                       std::uint64_t seed,
                                                       std::span<const Statistic> statistics) {
  if (pulse.kind() != SignalKind::pulse_template) {
    throw std::invalid_argument("observations need a unit-power pulse template");
  }
  return evaluate(layout, &pulse, pulse_amplitude(snr_db, model), model, trials, seed, statistics);
}

double upper_quantile(std::vector<double> values, double pfa) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("pfa must lie in (0, 1)");
  const double n = static_cast<double>(values.size());
  if (n * pfa < 100.0 - 1e-9) {
    throw std::invalid_argument("too few trials for the requested pfa (need trials * pfa >= 100)");
  }
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - pfa) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

double exceed_fraction(std::span<const double> values, double threshold) noexcept {
  if (values.empty()) return 0.0;
  const auto hits = std::count_if(values.begin(), values.end(),
                                  [threshold](double v) { return v > threshold; });
  return static_cast<double>(hits) / static_cast<double>(values.size());
}

double binomial_stderr(double p, std::size_t trials) noexcept {
  if (trials == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

}  // namespace wavedet
