#pragma once

// Independent reference implementations used only by the tests. None of them
// shares code with the library beyond the filter taps themselves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace oracle {

inline double normal_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

/// Q(x) by composite Simpson quadrature of the density. For x >= 0 the tail is
/// integrated on [x, x + 40]; negative x uses Q(x) = 1 - Q(-x).
inline double q_simpson(double x, int panels = 200000) {
  if (x < 0.0) return 1.0 - q_simpson(-x, panels);
  const double a = x;
  const double b = x + 40.0;
  const double h = (b - a) / panels;
  double sum = normal_density(a) + normal_density(b);
  for (int i = 1; i < panels; ++i) sum += normal_density(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Q^{-1}(p) by bisection on q_simpson.
inline double q_inverse_simpson(double p) {
  double lo = -10.0;
  double hi = 10.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (q_simpson(mid, 20000) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Dense analysis matrix of one periodic pyramid step: the first len/2 rows
/// produce the approximation, the last len/2 the detail.
inline std::vector<double> step_matrix(std::span<const double> h, std::span<const double> g,
                                       std::size_t len) {
  std::vector<double> m(len * len, 0.0);
  const std::size_t half = len / 2;
  for (std::size_t k = 0; k < half; ++k) {
    for (std::size_t n = 0; n < h.size(); ++n) {
      const long idx = static_cast<long>(2 * k) - static_cast<long>(n);
      const auto j = static_cast<std::size_t>(((idx % static_cast<long>(len)) + static_cast<long>(len)) %
                                              static_cast<long>(len));
      m[k * len + j] += h[n];
      m[(half + k) * len + j] += g[n];
    }
  }
  return m;
}

inline std::vector<double> mat_vec(const std::vector<double>& m, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) y[r] += m[r * n + c] * x[c];
  }
  return y;
}

/// Detail vectors of levels 1..levels by repeated dense matrix products.
inline std::vector<std::vector<double>> matrix_dwt(std::span<const double> h,
                                                   std::span<const double> g,
                                                   std::vector<double> x, int levels) {
  std::vector<std::vector<double>> details;
  for (int level = 0; level < levels; ++level) {
    const std::size_t len = x.size();
    const auto y = mat_vec(step_matrix(h, g, len), x);
    details.emplace_back(y.begin() + static_cast<long>(len / 2), y.end());
    x.assign(y.begin(), y.begin() + static_cast<long>(len / 2));
  }
  return details;
}

/// Soft-margin SVM dual by projected gradient ascent with Nesterov momentum.
///
/// Projection onto {0 <= a_i <= C_i, sum y_i a_i = 0} finds the multiplier of
/// the equality constraint by bisection. Runs until successive iterates move
/// less than `tol` in the max norm.
struct QpResult {
  std::vector<double> alphas;
  double objective = 0.0;
};

inline double dual_value(const std::vector<double>& q, std::span<const double> a) {
  const std::size_t n = a.size();
  double lin = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < n; ++j) quad += a[i] * a[j] * q[i * n + j];
  }
  return lin - 0.5 * quad;
}

inline std::vector<double> project_box_hyperplane(std::span<const double> v, std::span<const int> y,
                                                  std::span<const double> c) {
  const std::size_t n = v.size();
  auto at = [&](double lambda, std::vector<double>& out) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::clamp(v[i] - lambda * y[i], 0.0, c[i]);
      s += y[i] * out[i];
    }
    return s;
  };
  std::vector<double> out(n);
  double lo = -1e6;
  double hi = 1e6;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at(mid, out) > 0.0 ? lo : hi) = mid;  // s is non-increasing in lambda
  }
  at(0.5 * (lo + hi), out);
  return out;
}

inline QpResult svm_dual_qp(std::span<const double> patterns, std::size_t dim,
                            std::span<const int> y, double c_plus, double c_minus,
                            double tol = 1e-10, std::size_t max_iter = 2000000) {
  const std::size_t n = y.size();
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += patterns[i * dim + k] * patterns[j * dim + k];
      q[i * n + j] = y[i] * y[j] * dot;
    }
  }
  // Lipschitz constant of the gradient: largest eigenvalue of Q by power iteration.
  std::vector<double> v(n, 1.0);
  double lip = 1.0;
  for (int it = 0; it < 500; ++it) {
    const auto w = mat_vec(q, v);
    const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (norm == 0.0) break;
    lip = norm / std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  lip *= 1.01;

  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = y[i] > 0 ? c_plus : c_minus;
  std::vector<double> a(n, 0.0);
  std::vector<double> z = a;
  double t = 1.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const auto qz = mat_vec(q, z);
    std::vector<double> step(n);
    for (std::size_t i = 0; i < n; ++i) step[i] = z[i] + (1.0 - qz[i]) / lip;
    auto next = project_box_hyperplane(step, y, c);
    double move = 0.0;
    for (std::size_t i = 0; i < n; ++i) move = std::max(move, std::abs(next[i] - a[i]));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) z[i] = next[i] + (t - 1.0) / t_next * (next[i] - a[i]);
    // Restart momentum whenever the objective drops.
    if (dual_value(q, next) < dual_value(q, a)) {
      z = next;
      t = 1.0;
    } else {
      t = t_next;
    }
    a = std::move(next);
    if (move < tol && it > 10) break;
  }
  return {a, dual_value(q, a)};
}

}  // namespace oracle
