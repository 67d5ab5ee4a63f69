#include <cmath>

#include "doctest.h"
#include "robin_sep/spectral.hpp"
#include "support.hpp"

using namespace robin_sep;

namespace {

const ReservoirParams kParamSets[] = {ReservoirParams::make(0.5, 0.5, 1, 1), ReservoirParams::make(0.5, 0.5, 0.5, 2),
                                      ReservoirParams::make(0.5, 0.5, 3, 0.2)};

double defining_residual(const ReservoirParams& p, double lambda) {
  const double s = std::sqrt(lambda);
  return std::tan(s) * (lambda * p.cap_a * p.cap_b - 1.0) - (p.cap_a + p.cap_b) * s;
}

}  // namespace

TEST_CASE("eigenvalue roots satisfy the transcendental equation and grow like j^2") {
  for (const auto& p : kParamSets) {
    const auto basis = solve_eigenvalues(p, 128);
    REQUIRE(basis.size() == 128);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double lam = basis.eigenvalues[j];
      CHECK(std::abs(basis.residuals[j]) < 1e-8);
      if (std::abs(std::cos(std::sqrt(lam))) > 1e-3) CHECK(std::abs(defining_residual(p, lam)) < 1e-6 * (1 + lam));
      const double ratio = lam / ((j + 1.0) * (j + 1.0));
      CHECK(ratio > 0.1);
      CHECK(ratio < 12.0);
      if (j > 0) CHECK(lam > basis.eigenvalues[j - 1]);
    }
  }
}

TEST_CASE("distance of sqrt(lambda_j) to the nearest multiple of pi shrinks monotonically for A = B = 1") {
  const auto basis = solve_eigenvalues(kParamSets[0], 64);
  double prev = 1e300;
  for (std::size_t j = 4; j < basis.size(); ++j) {
    const double gap = std::abs(basis.roots[j] - j * M_PI);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("eigenfunctions: orthonormality, boundary identity, uniform bound") {
  for (const auto& p : kParamSets) {
    const auto basis = solve_eigenvalues(p, 64);
    const auto gram = gram_quadrature(basis, 64, 256);
    double worst = 0.0;
    for (std::size_t i = 0; i < 64; ++i)
      for (std::size_t j = 0; j < 64; ++j) worst = std::max(worst, std::abs(gram[i * 64 + j] - (i == j)));
    CHECK(worst < 1e-8);
    double sup = 0.0;
    for (std::size_t j = 0; j < 64; ++j) {
      CHECK(eigenfunction_derivative(basis, j + 1, 0.0) ==
            doctest::Approx(eigenfunction(basis, j + 1, 0.0) / p.cap_a).epsilon(1e-12));
      CHECK(-eigenfunction_derivative(basis, j + 1, 1.0) ==
            doctest::Approx(eigenfunction(basis, j + 1, 1.0) / p.cap_b).epsilon(1e-9).scale(1.0));
      for (int k = 0; k <= 200; ++k) sup = std::max(sup, std::abs(eigenfunction(basis, j + 1, k / 200.0)));
    }
    CHECK(sup < 3.0);
  }
}

TEST_CASE("green kernel is symmetric and inverts the Robin Laplacian") {
  const auto p = kParamSets[0];
  for (double x : {0.0, 0.1, 0.5, 0.93})
    for (double y : {0.0, 0.27, 0.5, 1.0}) CHECK(green_kernel(p, x, y) == doctest::Approx(green_kernel(p, y, x)));
  const auto one = green_apply(p, GridFunction::sample(1024, [](double) { return 1.0; }));
  // -u'' = 1 with u'(0) = u(0), u'(1) = -u(1) gives u = (1 + x - x^2)/2.
  for (std::size_t j = 0; j <= 1024; j += 128) {
    const double x = j / 1024.0;
    CHECK(one.values[j] == doctest::Approx((1 + x - x * x) / 2).epsilon(1e-10));
  }
  for (const auto& q : kParamSets) {
    const auto basis = solve_eigenvalues(q, 16);
    for (std::size_t j = 0; j < 16; ++j) {
      const auto fj = eigenfunction_grid(basis, j + 1, 2048);
      const auto kf = green_apply(q, fj);
      double err = 0.0;
      for (std::size_t i = 0; i < fj.values.size(); ++i)
        err = std::max(err, std::abs(kf.values[i] - fj.values[i] / basis.eigenvalues[j]));
      CHECK(err < 1e-6);
    }
  }
}

TEST_CASE("semigroup: identity at t = 0, contraction, commutation with the gradient") {
  const auto p = kParamSets[1];
  const auto basis = solve_eigenvalues(p, 128);
  const auto f1 = eigenfunction_grid(basis, 1, 512);
  const auto p0 = semigroup_apply(basis, 0.0, f1, SemigroupFlavor::robin);
  for (std::size_t i = 0; i < f1.values.size(); ++i) CHECK(p0.values[i] == doctest::Approx(f1.values[i]).scale(1));
  const auto pt = semigroup_apply(basis, 0.3, f1, SemigroupFlavor::robin);
  for (std::size_t i = 0; i < f1.values.size(); ++i)
    CHECK(pt.values[i] == doctest::Approx(std::exp(-0.3 * basis.eigenvalues[0]) * f1.values[i]).scale(1));

  test_support::Gen gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    const GridFunction f(gen.smooth_function(512));
    for (double t : {1e-3, 1e-2, 0.1, 1.0})
      CHECK(l2_norm(semigroup_apply(basis, t, f, SemigroupFlavor::robin)) <= l2_norm(f) * (1 + 1e-12));
  }

  const std::size_t m = 2048;
  const auto f = GridFunction::sample(m, [](double x) { return x * (1 - x) * std::exp(x); });
  const auto df = GridFunction::sample(m, [](double x) { return (1 - x - x * x) * std::exp(x); });
  for (double t : {1e-3, 1e-2, 0.1, 1.0}) {
    const auto lhs = test_support::gradient4(semigroup_apply(basis, t, f, SemigroupFlavor::dirichlet).values, 1.0 / m);
    const auto rhs = semigroup_apply(basis, t, df, SemigroupFlavor::neumann).values;
    double err = 0.0;
    for (std::size_t i = 0; i <= m; ++i) err = std::max(err, std::abs(lhs[i] - rhs[i]));
    CHECK(err < 1e-6);
  }
}

TEST_CASE("Robin norm: zero, eigenfunction value, equivalence with H1") {
  const auto p = kParamSets[2];
  CHECK(hr_norm(p, GridFunction::sample(256, [](double) { return 0.0; })) == 0.0);
  const auto basis = solve_eigenvalues(p, 8);
  for (std::size_t j = 0; j < 8; ++j)
    CHECK(hr_norm(p, eigenfunction_grid(basis, j + 1, 4096)) == doctest::Approx(basis.eigenvalues[j]).epsilon(1e-5));
  test_support::Gen gen(8);
  double lo = 1e300, hi = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const GridFunction f(gen.smooth_function(512));
    const double r = hr_norm(p, f) / h1_norm(f);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo > 0.01);
  CHECK(hi < 100.0);
}
