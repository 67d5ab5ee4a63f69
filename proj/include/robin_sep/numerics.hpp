#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace robin_sep {

/// Compensated (Neumaier) accumulator. Summation order is the only thing
/// that changes the result, so callers aggregate in a fixed index order.
class KahanSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Composite Simpson rule on a uniform grid with spacing h. An odd number of
/// intervals is closed with the 3/8 rule on the last three. Needs >= 3 nodes
/// (two nodes fall back to the trapezoid rule).
double simpson(std::span<const double> values, double h);

/// Simpson weights for n nodes (same rule as simpson()).
std::vector<double> simpson_weights(std::size_t n, double h);

/// Running integral F(x_i) = int_0^{x_i} f on a uniform grid. Even nodes
/// accumulate Simpson pairs; an odd node adds its last interval with a
/// four-point cubic rule. Fourth order throughout (trapezoid below 4 nodes).
std::vector<double> cumulative_integral(std::span<const double> values, double h);

/// Trapezoid weights for a (possibly non-uniform) increasing grid.
std::vector<double> trapezoid_weights(std::span<const double> nodes);

/// Second-order derivative on a uniform grid: centered inside, three-point
/// one-sided at the two ends.
std::vector<double> gradient(std::span<const double> values, double h);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights of the composite 8-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre_rule(double a, double b, int panels);

/// Composite 8-point Gauss-Legendre quadrature of f over [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels);

/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]` are
/// ignored. Throws NumericError on a vanishing pivot or non-finite output.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs);

/// Uniform grid on [0, 1] with `intervals` + 1 nodes.
std::vector<double> unit_grid(std::size_t intervals);

/// Linear interpolation of nodal values on a uniform unit grid.
double interpolate_unit_grid(std::span<const double> values, double x);

}  // namespace robin_sep
