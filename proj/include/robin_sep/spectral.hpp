#pragma once

#include <string>
#include <vector>

#include "robin_sep/params.hpp"

namespace robin_sep {

/// Nodal values on the uniform grid x_j = j/M, j = 0..M.
struct GridFunction {
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(std::vector<double> v);
  static GridFunction sample(std::size_t intervals, const auto& f) {
    std::vector<double> v(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j)
      v[j] = f(static_cast<double>(j) / static_cast<double>(intervals));
    return GridFunction(std::move(v));
  }

  std::size_t intervals() const { return values.size() - 1; }
  double spacing() const { return 1.0 / static_cast<double>(intervals()); }
  double x(std::size_t j) const { return static_cast<double>(j) * spacing(); }
  /// Throws InvalidArgument unless M >= 16 and all values are finite.
  void validate() const;
};

double l2_norm(const GridFunction& f);
double l2_inner(const GridFunction& f, const GridFunction& g);

/// Eigenpairs of -Laplacian with f'(0) = f(0)/A, -f'(1) = f(1)/B.
struct SpectralBasis {
  ReservoirParams params;
  /// Square roots s_j of the eigenvalues, s_j in ((j-1)pi, j pi).
  std::vector<double> roots;
  std::vector<double> eigenvalues;
  std::vector<double> amplitudes;
  std::vector<double> residuals;

  std::size_t size() const { return eigenvalues.size(); }
  /// CSV with columns j,lambda,a,residual.
  std::string to_csv() const;
};

/// The K smallest eigenvalues. Roots are bracketed in s = sqrt(lambda) using
/// the entire function sin s (s^2 AB - 1) - (A + B) s cos s, refined by
/// bisection and polished by Newton. Throws NumericError on a failed bracket.
SpectralBasis solve_eigenvalues(const ReservoirParams& params, std::size_t count);

/// f_j(x) = a_j [cos(s_j x) + sin(s_j x)/(A s_j)], 1 <= j <= K.
double eigenfunction(const SpectralBasis& basis, std::size_t j, double x);
double eigenfunction_derivative(const SpectralBasis& basis, std::size_t j, double x);
GridFunction eigenfunction_grid(const SpectralBasis& basis, std::size_t j,
                                std::size_t intervals);

/// Gram matrix <f_i, f_j> for i, j <= n, from closed-form trigonometric
/// integrals. Row-major n x n.
std::vector<double> gram_closed_form(const SpectralBasis& basis, std::size_t n);
/// Same by composite Gauss-Legendre quadrature.
std::vector<double> gram_quadrature(const SpectralBasis& basis, std::size_t n, int panels);

/// Green kernel of the Robin Laplacian.
double green_kernel(const ReservoirParams& params, double x, double y);
/// (K_R f)(x_i) = int K_R(x_i, y) f(y) dy.
GridFunction green_apply(const ReservoirParams& params, const GridFunction& f);

enum class SemigroupFlavor { robin, mixed, dirichlet, neumann };

/// Upper bound on sum_{k > K} exp(-lambda_k t) from lambda_k >= c0 k^2.
double semigroup_tail(const SpectralBasis& basis, double t);

/// Heat semigroup applied to f. robin uses the basis; dirichlet/neumann the
/// classical sine/cosine bases with the same number of modes; mixed expands
/// in g_k = f_k'/sqrt(lambda_k), orthonormal for
/// <g, h>_M = A g(0)h(0) + int g h + B g(1)h(1), so that
/// (P^R f)' = P^M (f') for f in the Robin domain. If tail_tolerance > 0 and
/// the estimated tail exceeds it, throws NumericError.
GridFunction semigroup_apply(const SpectralBasis& basis, double t, const GridFunction& f,
                             SemigroupFlavor flavor, double tail_tolerance = 0.0);

/// Coefficients <f, f_k>, k = 1..K.
std::vector<double> robin_coefficients(const SpectralBasis& basis, const GridFunction& f);

/// f(0)^2/A + int (f')^2 + f(1)^2/B.
double hr_norm(const ReservoirParams& params, const GridFunction& f);

/// Squared first-order Sobolev norm int f^2 + int (f')^2.
double h1_norm(const GridFunction& f);

}  // namespace robin_sep
