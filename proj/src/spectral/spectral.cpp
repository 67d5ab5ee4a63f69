#include "robin_sep/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "robin_sep/errors.hpp"
#include "robin_sep/numerics.hpp"

namespace robin_sep {
namespace {

using ld = long double;
constexpr ld kPi = std::numbers::pi_v<long double>;

ld characteristic(ld s, ld a, ld b) {
  return std::sin(s) * (s * s * a * b - 1) - (a + b) * s * std::cos(s);
}

ld characteristic_prime(ld s, ld a, ld b) {
  return std::cos(s) * (s * s * a * b - 1) + std::sin(s) * 2 * s * a * b - (a + b) * std::cos(s) +
         (a + b) * s * std::sin(s);
}

/// int_0^1 trig(p x) trig(q x) dx for the four cos/sin combinations.
double cc(double p, double q) {
  if (std::abs(p - q) < 1e-14) return 0.5 + (p == 0.0 ? 0.5 : std::sin(2 * p) / (4 * p));
  auto sinc = [](double w) { return w == 0.0 ? 1.0 : std::sin(w) / w; };
  return 0.5 * (sinc(p - q) + sinc(p + q));
}
double ss(double p, double q) {
  if (std::abs(p - q) < 1e-14) return 0.5 - (p == 0.0 ? 0.5 : std::sin(2 * p) / (4 * p));
  auto sinc = [](double w) { return w == 0.0 ? 1.0 : std::sin(w) / w; };
  return 0.5 * (sinc(p - q) - sinc(p + q));
}
/// int_0^1 sin(p x) cos(q x) dx.
double sc(double p, double q) {
  auto one_minus_cos_over = [](double w) { return w == 0.0 ? 0.0 : (1.0 - std::cos(w)) / w; };
  return 0.5 * (one_minus_cos_over(p + q) + one_minus_cos_over(p - q));
}

void check_grid(const GridFunction& f) { f.validate(); }

}  // namespace

GridFunction::GridFunction(std::vector<double> v) : values(std::move(v)) {}

void GridFunction::validate() const {
  if (values.size() < 17) throw InvalidArgument("grid functions need at least 16 intervals");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("grid function has non-finite values");
}

double l2_inner(const GridFunction& f, const GridFunction& g) {
  if (f.values.size() != g.values.size()) throw InvalidArgument("grid size mismatch");
  std::vector<double> p(f.values.size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = f.values[j] * g.values[j];
  return simpson(p, f.spacing());
}

double l2_norm(const GridFunction& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

std::string SpectralBasis::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "j,lambda,a,residual\n";
  for (std::size_t j = 0; j < size(); ++j)
    os << j + 1 << ',' << eigenvalues[j] << ',' << amplitudes[j] << ',' << residuals[j] << '\n';
  return os.str();
}

SpectralBasis solve_eigenvalues(const ReservoirParams& params, std::size_t count) {
  if (count < 1) throw InvalidArgument("eigenvalue count must be >= 1");
  if (!(params.cap_a > 0.0 && params.cap_b > 0.0)) throw InvalidArgument("A and B must be positive");
  const ld a = params.cap_a, b = params.cap_b;
  SpectralBasis basis;
  basis.params = params;
  for (std::size_t j = 1; j <= count; ++j) {
    ld lo = (j - 1) * kPi, hi = j * kPi;
    // F(s) ~ -(1 + A + B) s near 0, so the first bracket's left sign is negative.
    ld f_lo = j == 1 ? -1.0L : characteristic(lo, a, b);
    const ld f_hi = characteristic(hi, a, b);
    if (!(f_lo * f_hi < 0)) throw NumericError("eigenvalue bracket failed for j=" + std::to_string(j));
    for (int it = 0; it < 80; ++it) {
      const ld mid = 0.5L * (lo + hi);
      const ld fm = characteristic(mid, a, b);
      if (fm == 0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0) == (f_lo < 0)) {
        lo = mid;
        f_lo = fm;
      } else {
        hi = mid;
      }
    }
    ld s = 0.5L * (lo + hi);
    const ld bracket_lo = (j - 1) * kPi, bracket_hi = j * kPi;
    for (int it = 0; it < 5; ++it) {
      const ld d = characteristic_prime(s, a, b);
      if (d == 0) break;
      const ld next = s - characteristic(s, a, b) / d;
      if (!(next > bracket_lo && next < bracket_hi)) break;
      s = next;
    }
    const ld residual = std::abs(std::tan(s) * (s * s * a * b - 1) - (a + b) * s);
    const double sd = static_cast<double>(s);
    const double as = params.cap_a * sd;
    const double norm2 = (0.5 + std::sin(2 * sd) / (4 * sd)) +
                         (0.5 - std::sin(2 * sd) / (4 * sd)) / (as * as) +
                         (1.0 - std::cos(2 * sd)) / (2 * sd) / as;
    basis.roots.push_back(sd);
    basis.eigenvalues.push_back(static_cast<double>(s * s));
    basis.amplitudes.push_back(1.0 / std::sqrt(norm2));
    basis.residuals.push_back(static_cast<double>(residual));
  }
  return basis;
}

double eigenfunction(const SpectralBasis& basis, std::size_t j, double x) {
  if (j < 1 || j > basis.size()) throw InvalidArgument("eigenfunction index out of range");
  const double s = basis.roots[j - 1];
  return basis.amplitudes[j - 1] * (std::cos(s * x) + std::sin(s * x) / (basis.params.cap_a * s));
}

double eigenfunction_derivative(const SpectralBasis& basis, std::size_t j, double x) {
  if (j < 1 || j > basis.size()) throw InvalidArgument("eigenfunction index out of range");
  const double s = basis.roots[j - 1];
  return basis.amplitudes[j - 1] * (-s * std::sin(s * x) + std::cos(s * x) / basis.params.cap_a);
}

GridFunction eigenfunction_grid(const SpectralBasis& basis, std::size_t j, std::size_t intervals) {
  return GridFunction::sample(intervals, [&](double x) { return eigenfunction(basis, j, x); });
}

std::vector<double> gram_closed_form(const SpectralBasis& basis, std::size_t n) {
  n = std::min(n, basis.size());
  std::vector<double> g(n * n);
  const double a = basis.params.cap_a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double p = basis.roots[i], q = basis.roots[j];
      const double ci = 1.0 / (a * p), cj = 1.0 / (a * q);
      const double v = cc(p, q) + ci * cj * ss(p, q) + ci * sc(p, q) + cj * sc(q, p);
      g[i * n + j] = basis.amplitudes[i] * basis.amplitudes[j] * v;
    }
  return g;
}

std::vector<double> gram_quadrature(const SpectralBasis& basis, std::size_t n, int panels) {
  n = std::min(n, basis.size());
  const auto rule = gauss_legendre_rule(0.0, 1.0, panels);
  const std::size_t q = rule.nodes.size();
  std::vector<double> table(n * q);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < q; ++k) table[i * q + k] = eigenfunction(basis, i + 1, rule.nodes[k]);
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      KahanSum sum;
      for (std::size_t k = 0; k < q; ++k) sum.add(rule.weights[k] * table[i * q + k] * table[j * q + k]);
      g[i * n + j] = g[j * n + i] = sum.value();
    }
  return g;
}

double green_kernel(const ReservoirParams& params, double x, double y) {
  const double lo = std::min(x, y), hi = std::max(x, y);
  return (params.cap_b + 1.0 - hi) * (params.cap_a + lo) / (1.0 + params.cap_a + params.cap_b);
}

GridFunction green_apply(const ReservoirParams& params, const GridFunction& f) {
  check_grid(f);
  const std::size_t n = f.values.size();
  const double h = f.spacing();
  const double a = params.cap_a, b = params.cap_b, w = 1.0 + a + b;
  std::vector<double> left(n), right(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = f.x(j);
    left[j] = (a + x) * f.values[j];
    // reversed so the running integral starts at y = 1; here y = 1 - x
    right[j] = (b + x) * f.values[n - 1 - j];
  }
  const auto cum_left = cumulative_integral(left, h);
  const auto cum_right = cumulative_integral(right, h);
  GridFunction out;
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = f.x(j);
    out.values[j] = ((b + 1.0 - x) * cum_left[j] + (a + x) * cum_right[n - 1 - j]) / w;
  }
  return out;
}

double semigroup_tail(const SpectralBasis& basis, double t) {
  if (basis.size() == 0) return std::numeric_limits<double>::infinity();
  double c0 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const double k = static_cast<double>(j + 1);
    c0 = std::min(c0, basis.eigenvalues[j] / (k * k));
  }
  if (t <= 0.0) return std::numeric_limits<double>::infinity();
  const double r = std::sqrt(c0 * t);
  return 0.5 * std::sqrt(std::numbers::pi / (c0 * t)) * std::erfc(static_cast<double>(basis.size()) * r);
}

std::vector<double> robin_coefficients(const SpectralBasis& basis, const GridFunction& f) {
  std::vector<double> c(basis.size());
  const auto w = simpson_weights(f.values.size(), f.spacing());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    KahanSum s;
    for (std::size_t j = 0; j < f.values.size(); ++j)
      s.add(w[j] * f.values[j] * eigenfunction(basis, k + 1, f.x(j)));
    c[k] = s.value();
  }
  return c;
}

GridFunction semigroup_apply(const SpectralBasis& basis, double t, const GridFunction& f,
                             SemigroupFlavor flavor, double tail_tolerance) {
  check_grid(f);
  if (!(t >= 0.0)) throw InvalidArgument("semigroup time must be nonnegative");
  if (tail_tolerance > 0.0) {
    const double tail = semigroup_tail(basis, t);
    if (tail > tail_tolerance)
      throw NumericError("spectral truncation too small: estimated tail " + std::to_string(tail));
  }
  const std::size_t n = f.values.size();
  const std::size_t modes = basis.size();
  const auto w = simpson_weights(n, f.spacing());
  GridFunction out;
  out.values.assign(n, 0.0);

  auto expand = [&](auto&& mode_value, auto&& inner, double decay_rate) {
    const double coef = inner();
    const double e = std::exp(-decay_rate * t) * coef;
    if (e == 0.0) return;
    for (std::size_t j = 0; j < n; ++j) out.values[j] += e * mode_value(f.x(j));
  };

  switch (flavor) {
    case SemigroupFlavor::robin: {
      const auto c = robin_coefficients(basis, f);
      for (std::size_t k = 0; k < modes; ++k)
        expand([&](double x) { return eigenfunction(basis, k + 1, x); }, [&] { return c[k]; },
               basis.eigenvalues[k]);
      break;
    }
    case SemigroupFlavor::mixed: {
      const double a = basis.params.cap_a, b = basis.params.cap_b;
      for (std::size_t k = 0; k < modes; ++k) {
        const double root = basis.roots[k];
        auto g = [&](double x) { return eigenfunction_derivative(basis, k + 1, x) / root; };
        auto inner = [&] {
          KahanSum s;
          for (std::size_t j = 0; j < n; ++j) s.add(w[j] * f.values[j] * g(f.x(j)));
          s.add(a * f.values.front() * g(0.0));
          s.add(b * f.values.back() * g(1.0));
          return s.value();
        };
        expand(g, inner, basis.eigenvalues[k]);
      }
      break;
    }
    case SemigroupFlavor::dirichlet:
    case SemigroupFlavor::neumann: {
      const bool dir = flavor == SemigroupFlavor::dirichlet;
      if (!dir) {
        KahanSum s;
        for (std::size_t j = 0; j < n; ++j) s.add(w[j] * f.values[j]);
        for (std::size_t j = 0; j < n; ++j) out.values[j] += s.value();
      }
      for (std::size_t k = 1; k <= modes; ++k) {
        const double q = static_cast<double>(k) * std::numbers::pi;
        auto e = [&](double x) {
          return std::numbers::sqrt2 * (dir ? std::sin(q * x) : std::cos(q * x));
        };
        auto inner = [&] {
          KahanSum s;
          for (std::size_t j = 0; j < n; ++j) s.add(w[j] * f.values[j] * e(f.x(j)));
          return s.value();
        };
        expand(e, inner, q * q);
      }
      break;
    }
  }
  return out;
}

double hr_norm(const ReservoirParams& params, const GridFunction& f) {
  check_grid(f);
  const auto g = gradient(f.values, f.spacing());
  std::vector<double> g2(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) g2[j] = g[j] * g[j];
  return f.values.front() * f.values.front() / params.cap_a + simpson(g2, f.spacing()) +
         f.values.back() * f.values.back() / params.cap_b;
}

double h1_norm(const GridFunction& f) {
  check_grid(f);
  const auto g = gradient(f.values, f.spacing());
  std::vector<double> s(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) s[j] = g[j] * g[j] + f.values[j] * f.values[j];
  return simpson(s, f.spacing());
}

}  // namespace robin_sep
