#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "robin_sep/tilt_field.hpp"

namespace test_support {

/// H(t, x) = h everywhere.
class ConstantField : public robin_sep::TiltField {
 public:
  explicit ConstantField(double h) : h_(h) {}
  double value(double, double) const override { return h_; }
  double gradient(double, double) const override { return 0.0; }
  double time_derivative(double, double) const override { return 0.0; }
  double sup_value() const override { return std::abs(h_); }
  double sup_gradient() const override { return 0.0; }
  std::string id() const override { return "constant(" + std::to_string(h_) + ")"; }
  bool is_zero() const override { return h_ == 0.0; }
  bool time_independent() const override { return true; }

 private:
  double h_;
};

/// Property-test generator: draws reproducible samples from a fixed seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  /// Smooth random function sum_k c_k cos(k pi x) + d_k sin(k pi x) with decaying coefficients.
  std::vector<double> smooth_function(std::size_t intervals, int modes = 6) {
    std::vector<double> c(modes), d(modes);
    for (int k = 0; k < modes; ++k) {
      c[k] = uniform(-1.0, 1.0) / (1.0 + k * k);
      d[k] = uniform(-1.0, 1.0) / (1.0 + k * k);
    }
    std::vector<double> out(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(intervals);
      double v = 0.0;
      for (int k = 0; k < modes; ++k) v += c[k] * std::cos(k * M_PI * x) + d[k] * std::sin(k * M_PI * x);
      out[j] = v;
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};


/// Fourth-order finite-difference derivative on a uniform grid.
inline std::vector<double> gradient4(const std::vector<double>& v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) / (12 * h);
  d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h);
  d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h);
  d[n - 1] = (25 * v[n - 1] - 48 * v[n - 2] + 36 * v[n - 3] - 16 * v[n - 4] + 3 * v[n - 5]) / (12 * h);
  d[n - 2] = (3 * v[n - 1] + 10 * v[n - 2] - 18 * v[n - 3] + 6 * v[n - 4] - v[n - 5]) / (12 * h);
  return d;
}

}  // namespace test_support

namespace test_support {

/// Linear combination sum_i w_i H_i of fields.
class CombinedField : public robin_sep::TiltField {
 public:
  CombinedField(std::vector<double> weights, std::vector<robin_sep::FieldPtr> parts)
      : w_(std::move(weights)), parts_(std::move(parts)) {}
  double value(double t, double x) const override { return sum([&](const auto& f) { return f.value(t, x); }); }
  double gradient(double t, double x) const override {
    return sum([&](const auto& f) { return f.gradient(t, x); });
  }
  double time_derivative(double t, double x) const override {
    return sum([&](const auto& f) { return f.time_derivative(t, x); });
  }
  double sup_value() const override { return sum_abs([](const auto& f) { return f.sup_value(); }); }
  double sup_gradient() const override { return sum_abs([](const auto& f) { return f.sup_gradient(); }); }
  std::string id() const override { return "combined"; }
  std::vector<double> time_breakpoints() const override {
    std::vector<double> out;
    for (const auto& p : parts_)
      for (double b : p->time_breakpoints()) out.push_back(b);
    return out;
  }

 private:
  template <class F>
  double sum(F f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * f(*parts_[i]);
    return s;
  }
  template <class F>
  double sum_abs(F f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += std::abs(w_[i]) * f(*parts_[i]);
    return s;
  }
  std::vector<double> w_;
  std::vector<robin_sep::FieldPtr> parts_;
};

}  // namespace test_support
