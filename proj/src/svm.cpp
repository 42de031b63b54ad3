#include "wavedet/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "wavedet/montecarlo.hpp"
#include "wavedet/rng.hpp"

namespace wavedet {
namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kDenseGramLimit = 4096;

double dot(std::span<const double> x, std::span<const double> y) {
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

// Kernel columns K(:, i) = X x_i, precomputed when the Gram matrix fits.
class Gram {
 public:
  explicit Gram(const TrainingSet& ts) : ts_(ts), n_(ts.size()), diag_(n_) {
    for (std::size_t i = 0; i < n_; ++i) diag_[i] = dot(ts.pattern(i), ts.pattern(i));
    if (n_ <= kDenseGramLimit) {
      dense_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i; j < n_; ++j) {
          const double k = dot(ts.pattern(i), ts.pattern(j));
          dense_[i * n_ + j] = k;
          dense_[j * n_ + i] = k;
        }
      }
    } else {
      scratch_[0].resize(n_);
      scratch_[1].resize(n_);
    }
  }

  double diag(std::size_t i) const { return diag_[i]; }

  // slot selects which scratch buffer holds the column in the large-n mode.
  std::span<const double> column(std::size_t i, int slot) {
    if (!dense_.empty()) return {dense_.data() + i * n_, n_};
    auto& out = scratch_[slot];
    for (std::size_t j = 0; j < n_; ++j) out[j] = dot(ts_.pattern(i), ts_.pattern(j));
    return out;
  }

 private:
  const TrainingSet& ts_;
  std::size_t n_;
  std::vector<double> diag_;
  std::vector<double> dense_;
  std::vector<double> scratch_[2];
};

}  // namespace

void TrainingSet::validate() const {
  const std::size_t n = labels.size();
  if (patterns.size() != n * dimension || snr_db.size() != n) {
    throw std::invalid_argument("training set arrays disagree in size");
  }
  if (dimension == 0) throw std::invalid_argument("training patterns are empty");
  if (!layout.segments.empty() && layout.range_size(range) != dimension) {
    throw std::invalid_argument("pattern dimension does not match the layout");
  }
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (int y : labels) {
    if (y == 1) {
      ++pos;
    } else if (y == -1) {
      ++neg;
    } else {
      throw std::invalid_argument("labels must be +1 or -1");
    }
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("both classes need at least one pattern");
}

TrainingSet build_training_set(const SampledSignal& pulse, std::span<const int> scales,
                               const WaveletFilterPair& filters, const NoiseModel& model,
                               std::size_t n_pos, std::size_t n_neg, double snr_lo, double snr_hi,
                               std::uint64_t seed) {
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("both classes need at least one pattern");
  if (pulse.kind() != SignalKind::pulse_template) {
    throw std::invalid_argument("training needs a unit-power pulse template");
  }
  if (snr_hi < snr_lo) std::swap(snr_lo, snr_hi);

  ScaleTransform transform(filters, pulse.size(), std::vector<int>(scales.begin(), scales.end()));
  TrainingSet ts;
  ts.layout = transform.layout();
  ts.range = SumRange::steady;
  ts.dimension = ts.layout.range_size(ts.range);
  if (ts.dimension == 0) throw std::invalid_argument("selected scales have no steady coefficients");
  ts.snr_lo = snr_lo;
  ts.snr_hi = snr_hi;
  ts.seed = seed;
  ts.patterns.reserve((n_pos + n_neg) * ts.dimension);

  RandomStream snr_stream(substream_seed(seed, 0));
  const std::uint64_t pos_root = substream_seed(seed, 1);
  const std::uint64_t neg_root = substream_seed(seed, 2);
  std::vector<double> x(pulse.size());
  std::vector<double> d(ts.layout.size());
  const auto s = pulse.samples();

  auto append = [&](int label, double snr) {
    transform.apply(x, d);
    const auto kept = gather_range(ts.layout, d, ts.range);
    ts.patterns.insert(ts.patterns.end(), kept.begin(), kept.end());
    ts.labels.push_back(label);
    ts.snr_db.push_back(snr);
  };

  for (std::size_t i = 0; i < n_pos; ++i) {
    const double snr = snr_lo + (snr_hi - snr_lo) * (1.0 - snr_stream.uniform());
    fill_noise(x, model, substream_seed(pos_root, i));
    const double amplitude = pulse_amplitude(snr, model);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += amplitude * s[k];
    append(1, snr);
  }
  for (std::size_t i = 0; i < n_neg; ++i) {
    fill_noise(x, model, substream_seed(neg_root, i));
    append(-1, std::numeric_limits<double>::quiet_NaN());
  }
  return ts;
}

SvmModel train(const TrainingSet& ts, const SvmParams& params) {
  ts.validate();
  if (!(params.c_plus > 0.0) || !(params.c_minus > 0.0)) {
    throw std::invalid_argument("box constraints C+ and C- must be positive");
  }
  if (!(params.kkt_tolerance > 0.0)) throw std::invalid_argument("KKT tolerance must be positive");

  const std::size_t n = ts.size();
  const auto& y = ts.labels;
  auto box = [&](std::size_t i) { return y[i] > 0 ? params.c_plus : params.c_minus; };
  auto sign = [&](std::size_t i) { return static_cast<double>(y[i]); };

  Gram gram(ts);
  std::vector<double> alpha(n, 0.0);
  // Gradient of 1/2 a'Qa - e'a, Q_ij = y_i y_j K_ij.
  std::vector<double> grad(n, -1.0);

  auto objective = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += alpha[i] * (grad[i] - 1.0);
    return -0.5 * acc;
  };
  auto in_up = [&](std::size_t i) { return y[i] > 0 ? alpha[i] < box(i) : alpha[i] > 0.0; };
  auto in_low = [&](std::size_t i) { return y[i] > 0 ? alpha[i] > 0.0 : alpha[i] < box(i); };

  SvmModel model;
  model.layout = ts.layout;
  model.range = ts.range;
  model.c_plus = params.c_plus;
  model.c_minus = params.c_minus;
  model.kkt_tolerance = params.kkt_tolerance;

  const std::size_t cap = std::max<std::size_t>(1, params.max_passes) * std::max<std::size_t>(1, n);
  std::size_t iter = 0;
  for (; iter < cap; ++iter) {
    // Maximal violating pair.
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double f = -sign(t) * grad[t];
      if (in_up(t) && f > up_max) {
        up_max = f;
        i = t;
      }
      if (in_low(t) && f < low_min) {
        low_min = f;
        j = t;
      }
    }
    if (i == n || j == n || up_max - low_min < params.kkt_tolerance) {
      model.converged = true;
      break;
    }

    const auto k_i = gram.column(i, 0);
    const auto k_j = gram.column(j, 1);
    const double q_ij = sign(i) * sign(j) * k_i[j];
    const double c_i = box(i);
    const double c_j = box(j);
    const double old_i = alpha[i];
    const double old_j = alpha[j];

    if (y[i] != y[j]) {
      double quad = gram.diag(i) + gram.diag(j) + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > c_i - c_j) {
        if (alpha[i] > c_i) {
          alpha[i] = c_i;
          alpha[j] = c_i - diff;
        }
      } else if (alpha[j] > c_j) {
        alpha[j] = c_j;
        alpha[i] = c_j + diff;
      }
    } else {
      double quad = gram.diag(i) + gram.diag(j) - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c_i) {
        if (alpha[i] > c_i) {
          alpha[i] = c_i;
          alpha[j] = sum - c_i;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c_j) {
        if (alpha[j] > c_j) {
          alpha[j] = c_j;
          alpha[i] = sum - c_j;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double d_i = (alpha[i] - old_i) * sign(i);
    const double d_j = (alpha[j] - old_j) * sign(j);
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += sign(t) * (k_i[t] * d_i + k_j[t] * d_j);
    }

    if ((iter + 1) % n == 0) model.objective_history.push_back(objective());
  }
  model.iterations = iter;
  model.dual_objective = objective();
  model.objective_history.push_back(model.dual_objective);

  // Bias from free vectors, else the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = sign(t) * grad[t];
    if (alpha[t] >= box(t)) {
      if (y[t] < 0) {
        upper = std::min(upper, yg);
      } else {
        lower = std::max(lower, yg);
      }
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) {
        upper = std::min(upper, yg);
      } else {
        lower = std::max(lower, yg);
      }
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  double rho = 0.0;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(upper) && std::isfinite(lower)) {
    rho = 0.5 * (upper + lower);
  } else if (std::isfinite(upper)) {
    rho = upper;
  } else if (std::isfinite(lower)) {
    rho = lower;
  }
  model.b = -rho;

  model.support_count = static_cast<std::size_t>(
      std::count_if(alpha.begin(), alpha.end(), [](double a) { return a > 0.0; }));
  model.w = recover_weights(ts, alpha);
  model.alphas = std::move(alpha);
  return model;
}

double dual_objective(const TrainingSet& ts, std::span<const double> alphas) {
  if (alphas.size() != ts.size()) throw std::invalid_argument("alpha count mismatch");
  const auto w = recover_weights(ts, alphas);
  const double total = std::accumulate(alphas.begin(), alphas.end(), 0.0);
  return total - 0.5 * dot(w, w);
}

std::vector<double> recover_weights(const TrainingSet& ts, std::span<const double> alphas) {
  if (alphas.size() != ts.size()) throw std::invalid_argument("alpha count mismatch");
  std::vector<double> w(ts.dimension, 0.0);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (alphas[i] == 0.0) continue;
    const double c = alphas[i] * ts.labels[i];
    const auto x = ts.pattern(i);
    for (std::size_t k = 0; k < ts.dimension; ++k) w[k] += c * x[k];
  }
  return w;
}

double kkt_violation(const SvmModel& model, const TrainingSet& ts) {
  if (model.alphas.size() != ts.size()) throw std::invalid_argument("model/training set mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double margin = ts.labels[i] * decision(model, ts.pattern(i));
    const double a = model.alphas[i];
    const double c = model.box(ts.labels[i]);
    if (a <= 0.0) {
      worst = std::max(worst, 1.0 - margin);
    } else if (a >= c) {
      worst = std::max(worst, margin - 1.0);
    } else {
      worst = std::max(worst, std::abs(margin - 1.0));
    }
  }
  return worst;
}

double decision(const SvmModel& model, std::span<const double> pattern) {
  if (pattern.size() != model.w.size()) throw std::invalid_argument("pattern dimension mismatch");
  return dot(model.w, pattern) + model.b;
}

double decision(const SvmModel& model, const DetailCoefficients& d) {
  if (!(d.layout == model.layout)) {
    throw std::invalid_argument("detail layout does not match the training layout");
  }
  return decision(model, gather_range(d.layout, d.values, model.range));
}

LinearDetector to_detector(const SvmModel& model, double target_pfa) {
  return LinearDetector(model.layout, scatter_range(model.layout, model.w, model.range), -model.b,
                        target_pfa, {CalibrationMethod::analytic, 0, 0}, model.range);
}

LinearDetector calibrate_bias(const SvmModel& model, const NoiseModel& noise, double target_pfa,
                              std::size_t trials, std::uint64_t seed) {
  auto a = scatter_range(model.layout, model.w, model.range);
  const double vt = threshold_for_pfa_mc(model.layout, a, noise, target_pfa, trials, seed,
                                         model.range);
  return LinearDetector(model.layout, std::move(a), vt, target_pfa,
                        {CalibrationMethod::monte_carlo, trials, seed}, model.range);
}

std::vector<CPair> default_c_grid() {
  std::vector<CPair> grid;
  for (double cp : {0.1, 1.0, 10.0}) {
    for (double cm : {1.0, 10.0, 100.0}) grid.emplace_back(cp, cm);
  }
  return grid;
}

TuningResult tune_c_for_pfa(const TrainingSet& ts, const SampledSignal& pulse, double target_pfa,
                            std::span<const CPair> c_grid, std::size_t validation_noise_trials,
                            std::uint64_t seed, const NoiseModel& model,
                            const TuningOptions& options) {
  if (c_grid.empty()) throw std::invalid_argument("C grid is empty");
  if (options.validation_snr_points == 0) throw std::invalid_argument("need validation SNR points");

  std::vector<SvmModel> models;
  std::vector<std::vector<double>> weights;
  std::vector<Statistic> stats;
  models.reserve(c_grid.size());
  for (const auto& [cp, cm] : c_grid) {
    models.push_back(train(ts, {cp, cm, options.kkt_tolerance, options.max_passes}));
    weights.push_back(scatter_range(ts.layout, models.back().w, ts.range));
  }
  for (const auto& a : weights) {
    stats.emplace_back([&ts, &a](std::span<const double> d) {
      return linear_statistic(ts.layout, a, d, ts.range);
    });
  }

  // Shared realizations: every grid point sees the same noise and observations.
  const std::uint64_t calibration_seed = substream_seed(seed, 1);
  auto calibration =
      evaluate_noise(ts.layout, model, options.calibration_trials, calibration_seed, stats);
  const auto validation = evaluate_noise(ts.layout, model, validation_noise_trials,
                                         substream_seed(seed, 2), stats);

  std::vector<GridOutcome> outcomes(c_grid.size());
  for (std::size_t g = 0; g < c_grid.size(); ++g) {
    outcomes[g].c = c_grid[g];
    outcomes[g].converged = models[g].converged;
    outcomes[g].threshold = upper_quantile(std::move(calibration[g]), target_pfa);
    outcomes[g].realized_pfa = exceed_fraction(validation[g], outcomes[g].threshold);
    outcomes[g].admissible = outcomes[g].realized_pfa >= 0.5 * target_pfa &&
                             outcomes[g].realized_pfa <= 2.0 * target_pfa;
  }

  const std::size_t points = options.validation_snr_points;
  for (std::size_t p = 0; p < points; ++p) {
    const double snr = points == 1 ? 0.5 * (ts.snr_lo + ts.snr_hi)
                                   : ts.snr_lo + (ts.snr_hi - ts.snr_lo) * static_cast<double>(p) /
                                                     static_cast<double>(points - 1);
    const auto scores = evaluate_observations(ts.layout, pulse, snr, model,
                                              options.validation_pd_trials,
                                              substream_seed(seed, 3 + p), stats);
    for (std::size_t g = 0; g < c_grid.size(); ++g) {
      outcomes[g].mean_pd +=
          exceed_fraction(scores[g], outcomes[g].threshold) / static_cast<double>(points);
    }
  }

  std::size_t best = c_grid.size();
  for (std::size_t g = 0; g < c_grid.size(); ++g) {
    if (!outcomes[g].admissible) continue;
    if (best == c_grid.size() || outcomes[g].mean_pd > outcomes[best].mean_pd) best = g;
  }
  if (best == c_grid.size()) {
    throw std::runtime_error("no C grid point meets the false-alarm constraint");
  }

  LinearDetector detector(ts.layout, weights[best], outcomes[best].threshold, target_pfa,
                          {CalibrationMethod::monte_carlo, options.calibration_trials,
                           calibration_seed},
                          ts.range);
  return {std::move(models[best]), std::move(detector), std::move(outcomes), best};
}

}  // namespace wavedet
