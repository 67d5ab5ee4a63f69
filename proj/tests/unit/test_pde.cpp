#include <cmath>

#include "doctest.h"
#include "robin_sep/numerics.hpp"
#include "robin_sep/pde.hpp"
#include "robin_sep/spectral.hpp"
#include "support.hpp"

using namespace robin_sep;

namespace {

const ReservoirParams kAsym = ReservoirParams::make(0.2, 0.8, 1, 1);

double l2_distance(std::span<const double> a, std::span<const double> b, double h) {
  std::vector<double> d(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) d[j] = (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(simpson(d, h));
}

double sup_distance(std::span<const double> a, const Profile& f, std::size_t m) {
  double e = 0.0;
  for (std::size_t j = 0; j <= m; ++j) e = std::max(e, std::abs(a[j] - f(static_cast<double>(j) / m)));
  return e;
}

}  // namespace

TEST_CASE("stationary profile closed form and boundary conditions") {
  const auto flat = stationary_profile(ReservoirParams::make(0.3, 0.3, 2, 5));
  CHECK(flat.intercept == doctest::Approx(0.3));
  CHECK(flat.slope == doctest::Approx(0.0).scale(1));
  const auto s = stationary_profile(kAsym);
  CHECK(s.intercept == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(s.slope == doctest::Approx(0.2).epsilon(1e-15));
  test_support::Gen gen(4);
  for (int i = 0; i < 100; ++i) {
    const double a = gen.uniform(0.01, 0.99), b = gen.uniform(a, 0.99);
    const auto p = ReservoirParams::make(a, b, gen.uniform(0.1, 5), gen.uniform(0.1, 5));
    const auto r = stationary_profile(p);
    CHECK(std::abs(r.slope - (r(0.0) - p.alpha) / p.cap_a) < 1e-15);
    CHECK(std::abs(r.slope - (p.beta - r(1.0)) / p.cap_b) < 1e-15);
  }
}

TEST_CASE("hydrodynamic solver: stationarity, maximum principle, relaxation") {
  const auto rho = stationary_profile(kAsym);
  const auto still = solve_hydrodynamic(rho, kAsym, 0.2, {128, 256, 1});
  for (std::size_t i = 0; i < still.time_nodes(); ++i) CHECK(sup_distance(still.row(i), rho, 128) < 1e-10);

  const Profile rough = [](double x) { return x < 0.3 ? 0.95 : (x < 0.7 ? 0.05 : 0.5); };
  const auto u = solve_hydrodynamic(rough, kAsym, 0.3, {256, 512, 1});
  CHECK(u.min_value() >= 0.05 - 1e-12);
  CHECK(u.max_value() <= 0.95 + 1e-12);

  const auto late = solve_hydrodynamic(rough, kAsym, 10.0, {256, 4096, 64});
  CHECK(sup_distance(late.row(late.time_nodes() - 1), rho, 256) < 1e-6);
}

TEST_CASE("homogeneous Robin problem: eigenmode decay, fd vs spectral, confinement") {
  const auto p = ReservoirParams::make(0.5, 0.5, 0.5, 2.0);
  const auto basis = solve_eigenvalues(p, 4);
  const Profile f1 = [&](double x) { return eigenfunction(basis, 1, x); };
  const auto modal = solve_robin_homogeneous(f1, p, 0.2, HomogeneousMethod::spectral, {256, 64, 1}, 64);
  const double decay = std::exp(-basis.eigenvalues[0] * 0.2);
  CHECK(sup_distance(modal.row(modal.time_nodes() - 1), [&](double x) { return decay * f1(x); }, 256) < 1e-10);

  const Profile phi = [](double x) { return 0.5 + 0.3 * std::cos(M_PI * x) + 0.1 * x; };
  const auto fd = solve_robin_homogeneous(phi, p, 0.1, HomogeneousMethod::fd, {512, 2048, 1});
  const auto sp = solve_robin_homogeneous(phi, p, 0.1, HomogeneousMethod::spectral, {512, 2048, 1}, 128);
  for (std::size_t i = 0; i < fd.time_nodes(); i += 256)
    CHECK(l2_distance(fd.row(i), sp.row(i), 1.0 / 512) < 1e-4);

  const auto box = solve_robin_homogeneous([](double) { return 0.7; }, p, 0.5, HomogeneousMethod::fd, {256, 500, 1});
  for (std::size_t i = 10; i < box.time_nodes(); ++i) {
    double top = 0.0;
    for (double v : box.row(i)) top = std::max(top, v);
    CHECK(top < 0.7 - 1e-6);
  }
}

TEST_CASE("finite-difference solver converges at second order") {
  const auto p = ReservoirParams::make(0.5, 0.5, 0.5, 2.0);
  const Profile phi = [](double x) { return std::exp(-x) * (1 + std::sin(3 * x)); };
  std::vector<DensityPath> runs;
  for (std::size_t k : {1, 2, 4}) runs.push_back(solve_robin_homogeneous(phi, p, 0.1, HomogeneousMethod::fd, {32 * k, 32 * k, 1}));
  auto coarse_diff = [&](const DensityPath& a, const DensityPath& b) {
    const std::size_t ratio = b.intervals() / a.intervals();
    double e = 0.0;
    for (std::size_t j = 0; j <= a.intervals(); ++j)
      e = std::max(e, std::abs(a.at(a.time_nodes() - 1, j) - b.at(b.time_nodes() - 1, j * ratio)));
    return e;
  };
  const double order = std::log2(coarse_diff(runs[0], runs[1]) / coarse_diff(runs[1], runs[2]));
  CHECK(order >= 1.9);
}

TEST_CASE("controlled solver: zero field, mass balance, stability in the initial datum") {
  const Profile gamma = [](double x) { return 0.3 + 0.4 * x * x; };
  const auto hydro = solve_hydrodynamic(gamma, kAsym, 0.1, {128, 256, 1});
  const auto zero = solve_controlled(gamma, kAsym, *make_zero_field(), 0.1, {{128, 256, 1}, 6});
  for (std::size_t i = 0; i < hydro.time_nodes(); ++i) CHECK(sup_distance(zero.row(i), [&](double x) {
    return interpolate_unit_grid(hydro.row(i), x);
  }, 128) < 1e-10);

  const auto field = make_ramped_field(make_sine_field(0.4, 1), 0.05);
  const auto u = solve_controlled(gamma, kAsym, *field, 0.1, {{256, 512, 1}, 6});
  const auto defect = mass_balance_defect(u, kAsym, *field);
  for (double d : defect) CHECK(std::abs(d) < 1e-6);

  const Profile other = [](double x) { return 0.5 - 0.2 * std::cos(2 * M_PI * x); };
  const auto v = solve_controlled(other, kAsym, *field, 0.1, {{256, 512, 1}, 6});
  const double d0 = l2_distance(u.row(0), v.row(0), 1.0 / 256);
  for (std::size_t i = 1; i < u.time_nodes(); i += 32)
    CHECK(l2_distance(u.row(i), v.row(i), 1.0 / 256) <= std::exp(10.0 * u.times()[i]) * d0);
}

TEST_CASE("affine field pushes the controlled profile upward") {
  const auto rho = stationary_profile(kAsym);
  const auto base = solve_controlled(rho, kAsym, *make_zero_field(), 0.2, {{128, 256, 1}, 6});
  const auto tilted = solve_controlled(rho, kAsym, *make_affine_field(1.0), 0.2, {{128, 256, 1}, 6});
  const auto last = base.time_nodes() - 1;
  double mass_base = simpson(base.row(last), 1.0 / 128), mass_tilted = simpson(tilted.row(last), 1.0 / 128);
  CHECK(mass_tilted > mass_base);
}

TEST_CASE("free-energy balance") {
  const auto same = ReservoirParams::make(0.35, 0.35, 1, 1);
  const auto flat = free_energy_diagnostic(solve_hydrodynamic([](double) { return 0.35; }, same, 0.1, {128, 128, 1}), same);
  CHECK(std::abs(flat.lhs.back()) < 1e-12);
  CHECK(std::abs(flat.rhs.back()) < 1e-12);
  const auto ledger = free_energy_diagnostic(solve_hydrodynamic([](double) { return 0.5; }, kAsym, 0.2), kAsym);
  CHECK(std::abs(ledger.final_gap) < 1e-3);
}

TEST_CASE("weak-form residual vanishes on solver output") {
  const Profile gamma = [](double x) { return 0.5 + 0.2 * std::sin(M_PI * x); };
  const auto u = solve_hydrodynamic(gamma, kAsym, 0.1, {256, 512, 1});
  auto g = [](double t, double x) { return std::cos(2 * x) * (1 + t); };
  auto g_t = [](double, double x) { return std::cos(2 * x); };
  auto g_x = [](double t, double x) { return -2 * std::sin(2 * x) * (1 + t); };
  auto g_xx = [](double t, double x) { return -4 * std::cos(2 * x) * (1 + t); };
  CHECK(std::abs(weak_form_residual(u, kAsym, nullptr, g, g_t, g_x, g_xx)) < 1e-4);
  const auto field = make_ramped_field(make_sine_field(0.4, 1), 0.05);
  const auto v = solve_controlled(gamma, kAsym, *field, 0.1, {{256, 512, 1}, 6});
  CHECK(std::abs(weak_form_residual(v, kAsym, field.get(), g, g_t, g_x, g_xx)) < 1e-4);
}
