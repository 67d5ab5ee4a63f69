#include <cmath>

#include "doctest.h"
#include "robin_sep/numerics.hpp"
#include "robin_sep/pde.hpp"
#include "robin_sep/rate.hpp"
#include "robin_sep/spectral.hpp"
#include "support.hpp"

using namespace robin_sep;

namespace {

const ReservoirParams kParams = ReservoirParams::make(0.2, 0.8, 1, 1);

FieldPtr oracle_field() { return make_ramped_field(make_sine_field(0.4, 1), 0.1); }

/// Controlled path generated by the oracle field from the stationary profile.
const DensityPath& oracle_path() {
  static const DensityPath u = solve_controlled(stationary_profile(kParams), kParams, *oracle_field(), 0.2);
  return u;
}

/// Hydrodynamic path from compatible smooth data: stationary profile plus
/// a multiple of the first Robin eigenfunction.
const DensityPath& hydro_path() {
  static const DensityPath u = [] {
    const auto basis = solve_eigenvalues(kParams, 1);
    const auto rho = stationary_profile(kParams);
    return solve_hydrodynamic([&](double x) { return rho(x) + 0.2 * eigenfunction(basis, 1, x); }, kParams, 0.2);
  }();
  return u;
}

}  // namespace

TEST_CASE("boundary cost identities over a parameter sweep") {
  test_support::Gen gen(1);
  for (int i = 0; i < 10000; ++i) {
    const BoundaryCostInputs in{gen.uniform(0.01, 0.99), gen.uniform(0.1, 5), gen.uniform(0.0, 1.0),
                                gen.uniform(-4, 4)};
    const double step = 1e-5;
    auto shifted = [&](double dm) { return boundary_b({in.rho, in.d, in.a, in.m + dm}); };
    CHECK(std::abs((shifted(step) - shifted(-step)) / (2 * step) - boundary_p(in)) < 1e-6);
    const double b = boundary_b(in), p = boundary_p(in);
    CHECK(std::abs(boundary_c(in) - (in.m * p - b)) <= 1e-12 * (1 + std::abs(in.m * p) + std::abs(b)));
    CHECK(std::abs(boundary_q(in) - (b - in.m * (in.rho - in.a) / in.d)) <= 1e-12 * (1 + std::abs(b)));
    CHECK(boundary_q(in) >= 0.0);
    CHECK(shifted(step) + shifted(-step) - 2 * b >= -1e-14);
    const BoundaryCostInputs zero{in.rho, in.d, in.a, 0.0};
    CHECK(boundary_b(zero) == 0.0);
    CHECK(boundary_q(zero) == 0.0);
    CHECK(boundary_c(zero) == 0.0);
    CHECK(boundary_p(zero) == doctest::Approx((in.rho - in.a) / in.d));
    const BoundaryCostInputs matched{in.a, in.d, in.a, in.m}, mirrored{in.a, in.d, in.a, -in.m};
    CHECK(boundary_b(matched) + boundary_b(mirrored) >= 0.0);
  }
}

TEST_CASE("rate evaluators vanish on the hydrodynamic path") {
  const auto& u = hydro_path();
  CHECK(std::abs(rate_direct(u, kParams).breakdown.i_total) <= 1e-8);
  const auto dec = rate_decomposed(u, kParams);
  CHECK(std::abs(dec.breakdown.i_bulk + dec.breakdown.i_boundary) <= 1e-8);
  CHECK(std::abs(rate_variational(u, kParams, {9, 6, 60, 1e-10}).value) <= 1e-8);
  CHECK(functional_j(u, *make_zero_field(), kParams).value == 0.0);
}

TEST_CASE("functional J is nonpositive on the hydrodynamic path and concave in the field") {
  const auto rho = stationary_profile(kParams);
  const auto u = solve_hydrodynamic([&](double x) { return rho(x) + 0.1 * std::cos(M_PI * x); }, kParams, 0.2,
                                    {128, 256, 1});
  test_support::Gen gen(6);
  for (int trial = 0; trial < 6; ++trial) {
    auto random_field = [&] {
      return std::make_shared<test_support::CombinedField>(
          std::vector<double>{gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-0.5, 0.5)},
          std::vector<FieldPtr>{make_affine_field(1.0), make_sine_field(1.0, 1),
                                make_ramped_field(make_sine_field(1.0, 2), 0.1)});
    };
    const auto h0 = random_field(), h1 = random_field();
    CHECK(functional_j(u, *h0, kParams).value <= 1e-6);
    std::vector<double> js;
    for (int k = 0; k <= 8; ++k) {
      const double s = k / 8.0;
      const test_support::CombinedField seg({1 - s, s}, {h0, h1});
      js.push_back(functional_j(u, seg, kParams).value);
    }
    for (int k = 1; k < 8; ++k) CHECK(js[k - 1] + js[k + 1] - 2 * js[k] <= 1e-9);
  }
}

TEST_CASE("direct rate recovers the generating field") {
  const auto& u = oracle_path();
  const auto field = oracle_field();
  const auto direct = rate_direct(u, kParams);
  CHECK(direct.breakdown.i_total > 0.0);
  double grad_err = 0.0, bnd_err = 0.0;
  const std::size_t m = u.intervals();
  for (std::size_t i = 0; i < u.time_nodes(); ++i) {
    const double t = u.times()[i];
    for (std::size_t j = 0; j <= m; ++j)
      grad_err = std::max(grad_err, std::abs(direct.field_gradient.at(i, j) - field->gradient(t, j * u.dx())));
    bnd_err = std::max(bnd_err, std::abs(direct.field.at(i, 0) - field->value(t, 0.0)));
    bnd_err = std::max(bnd_err, std::abs(direct.field.at(i, m) - field->value(t, 1.0)));
  }
  CHECK(grad_err < 1e-3);
  CHECK(bnd_err < 1e-3);
  CHECK(functional_j(u, *field, kParams).value == doctest::Approx(direct.breakdown.i_total).epsilon(1e-3));
}

TEST_CASE("decomposition: log-odds identity, normalisation of Xi, I1 + I2 = I") {
  const auto& u = oracle_path();
  const auto dec = rate_decomposed(u, kParams);
  const auto direct = rate_direct(u, kParams);
  CHECK(std::abs(dec.breakdown.i_bulk + dec.breakdown.i_boundary - direct.breakdown.i_total) < 1e-3);
  const auto& xi = dec.decomposition.xi;
  for (std::size_t i = 0; i < u.time_nodes(); i += 64) {
    const auto grad = test_support::gradient4(u.slice(i), u.dx());
    std::vector<double> ratio(grad.size());
    for (std::size_t j = 0; j < grad.size(); ++j) ratio[j] = grad[j] / mobility(u.at(i, j));
    auto logit = [](double v) { return std::log(v / (1 - v)); };
    CHECK(std::abs(simpson(ratio, u.dx()) - (logit(u.trace_right(i)) - logit(u.trace_left(i)))) < 1e-6);
    CHECK(xi.at(i, 0) == doctest::Approx(0.0).scale(1));
    CHECK(xi.at(i, xi.intervals()) == doctest::Approx(1.0));
    for (std::size_t j = 1; j <= xi.intervals(); ++j) CHECK(xi.at(i, j) >= xi.at(i, j - 1));
  }
}

TEST_CASE("boundary Legendre transform: sign, shift identity, growth") {
  test_support::Gen gen(9);
  for (int trial = 0; trial < 40; ++trial) {
    const double u0 = gen.uniform(0.1, 0.9), u1 = gen.uniform(0.1, 0.9), zeta = gen.uniform(0.2, 3);
    const BoundaryLegendre leg(kParams, u0, u1, zeta);
    CHECK(std::abs(leg.phi_hat(0, 0).value) < 1e-12);
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
    const auto direct = leg.phi(a, b);
    CHECK(direct.value >= -1e-12);
    const auto shifted = leg.phi_hat(a - (kParams.alpha - u0) / kParams.cap_a, b - (kParams.beta - u1) / kParams.cap_b);
    CHECK(direct.value == doctest::Approx(shifted.value).epsilon(1e-9).scale(1));
  }
  const BoundaryLegendre leg(kParams, 0.4, 0.6, 1.0);
  double prev_ratio = 1e300;
  for (double s : {4.0, 8.0, 16.0, 32.0, 64.0}) {
    const double ratio = leg.phi(s, -s).value / (s * s);
    CHECK(ratio < prev_ratio);
    prev_ratio = ratio;
  }
}

TEST_CASE("energy of simple paths") {
  DensityPath constant({0.0, 0.5, 1.0}, 64);
  DensityPath ramp({0.0, 0.5, 1.0}, 64);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j <= 64; ++j) {
      constant.at(i, j) = 0.4;
      ramp.at(i, j) = j / 64.0;
    }
  const auto e0 = energy(constant);
  CHECK(e0.q_value <= 1e-20);
  CHECK(e0.strong_energy <= 1e-20);
  CHECK(energy(ramp).q_value == doctest::Approx(0.5));
  CHECK(std::isfinite(energy(oracle_path()).strong_energy));
}

TEST_CASE("path cost algebra: additivity and restriction") {
  const auto hydro = path_cost_algebra_check(hydro_path(), kParams, 0.1);
  CHECK(std::abs(hydro.i_full) < 1e-8);
  CHECK(std::abs(hydro.i_first) < 1e-8);
  CHECK(std::abs(hydro.i_second) < 1e-8);
  for (double s : {0.05, 0.1, 0.15}) {
    const auto rep = path_cost_algebra_check(oracle_path(), kParams, s);
    CHECK(rep.subadditive);
    CHECK(rep.restriction);
    CHECK(std::abs(rep.additivity_gap) <= rep.tolerance);
  }
}

TEST_CASE("variational lower bound grows with the basis and stays below the direct rate") {
  const auto& u = oracle_path();
  const double target = rate_direct(u, kParams).breakdown.i_total;
  double prev = -1.0;
  for (std::size_t k : {1, 2, 4, 8}) {
    const auto v = rate_variational(u, kParams, {17, k, 60, 1e-10});
    CHECK(v.converged);
    CHECK(v.monotone);
    CHECK(v.value >= prev - 1e-12);
    CHECK(v.value <= target + 1e-4);
    CHECK(v.value > 0.0);
    prev = v.value;
  }
}
