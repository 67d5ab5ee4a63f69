#include "robin_sep/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "robin_sep/errors.hpp"

namespace robin_sep {

void KahanSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

std::vector<double> simpson_weights(std::size_t n, double h) {
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  if (n == 2) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  const std::size_t intervals = n - 1;
  // Simpson on an even number of intervals, 3/8 rule on the last three if odd.
  const std::size_t simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (intervals % 2 == 1) {
    const std::size_t s = simpson_end;
    w[s] += 3.0 * h / 8.0;
    w[s + 1] += 9.0 * h / 8.0;
    w[s + 2] += 9.0 * h / 8.0;
    w[s + 3] += 3.0 * h / 8.0;
  }
  return w;
}

double simpson(std::span<const double> values, double h) {
  const auto w = simpson_weights(values.size(), h);
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
  return s;
}

std::vector<double> cumulative_integral(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n < 4) {
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (i % 2 == 0) {
      out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    } else if (i == 1) {
      out[i] = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    } else if (i + 1 < n) {
      out[i] = out[i - 1] + h / 24.0 * (-f[i - 2] + 13.0 * f[i - 1] + 13.0 * f[i] - f[i + 1]);
    } else {
      out[i] = out[i - 1] + h / 24.0 * (f[i - 3] - 5.0 * f[i - 2] + 19.0 * f[i - 1] + 9.0 * f[i]);
    }
  }
  return out;
}

std::vector<double> trapezoid_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = nodes[i + 1] - nodes[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

std::vector<double> gradient(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> g(n, 0.0);
  if (n < 3) {
    if (n == 2) g[0] = g[1] = (f[1] - f[0]) / h;
    return g;
  }
  g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return g;
}

QuadratureRule gauss_legendre_rule(double a, double b, int panels) {
  static constexpr std::array<double, 4> nodes{0.1834346424956498, 0.5255324099163290,
                                               0.7966664774136267, 0.9602898564975363};
  static constexpr std::array<double, 4> weights{0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};
  const double h = (b - a) / panels;
  QuadratureRule rule;
  rule.nodes.reserve(8 * static_cast<std::size_t>(panels));
  rule.weights.reserve(rule.nodes.capacity());
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    for (std::size_t k = 0; k < 4; ++k) {
      rule.nodes.push_back(mid - half * nodes[k]);
      rule.nodes.push_back(mid + half * nodes[k]);
      rule.weights.push_back(weights[k] * half);
      rule.weights.push_back(weights[k] * half);
    }
  }
  return rule;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels) {
  const auto rule = gauss_legendre_rule(a, b, panels);
  KahanSum sum;
  for (std::size_t k = 0; k < rule.nodes.size(); k += 2)
    sum.add(rule.weights[k] * (f(rule.nodes[k]) + f(rule.nodes[k + 1])));
  return sum.value();
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), d(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw NumericError("tridiagonal solve: zero pivot");
  c[0] = n > 1 ? upper[0] / pivot : 0.0;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c[i - 1];
    if (pivot == 0.0) throw NumericError("tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("tridiagonal solve: non-finite solution");
  return x;
}

std::vector<double> unit_grid(std::size_t intervals) {
  std::vector<double> x(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j)
    x[j] = static_cast<double>(j) / static_cast<double>(intervals);
  return x;
}

double interpolate_unit_grid(std::span<const double> values, double x) {
  const std::size_t m = values.size() - 1;
  const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(m);
  const std::size_t j = std::min(static_cast<std::size_t>(pos), m - 1);
  const double w = pos - static_cast<double>(j);
  return (1.0 - w) * values[j] + w * values[j + 1];
}

}  // namespace robin_sep
