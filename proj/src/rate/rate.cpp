#include "robin_sep/rate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "robin_sep/errors.hpp"
#include "robin_sep/numerics.hpp"

namespace robin_sep {
namespace {

double logit(double u) { return std::log(u / (1.0 - u)); }

void require_interior(const DensityPath& u) {
  if (u.min_value() <= 0.0 || u.max_value() >= 1.0)
    throw NumericError("rate evaluation needs a path bounded away from 0 and 1");
  if (u.time_nodes() < 2) throw InvalidArgument("rate evaluation needs at least two time nodes");
}

std::vector<double> time_weights(const DensityPath& u) { return trapezoid_weights(u.times()); }

/// Per-slice quantities shared by the direct and decomposed evaluations.
struct Slice {
  std::vector<double> u, ux, ut, inv_sigma;
  /// W(x) = int_0^x 1/sigma, and int_0^x u_t.
  std::vector<double> w, s;
};

Slice make_slice(const DensityPath& path, std::size_t i) {
  Slice sl;
  const double h = path.dx();
  sl.u = path.slice(i);
  sl.ux = path.space_gradient(i);
  sl.ut = path.time_derivative(i);
  sl.inv_sigma.resize(sl.u.size());
  for (std::size_t j = 0; j < sl.u.size(); ++j) sl.inv_sigma[j] = 1.0 / mobility(sl.u[j]);
  sl.w = cumulative_integral(sl.inv_sigma, h);
  sl.s = cumulative_integral(sl.ut, h);
  return sl;
}

}  // namespace

std::string RateBreakdown::to_json() const {
  nlohmann::ordered_json j;
  j["i_total"] = i_total;
  j["i_bulk"] = i_bulk;
  j["i_boundary"] = i_boundary;
  j["energy"] = energy;
  j["strong_energy"] = strong_energy;
  j["max_residual"] = max_residual;
  j["time_nodes"] = times.size();
  return j.dump(2);
}

std::string RateBreakdown::integrands_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "t,bulk,boundary\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    os << times[i] << ',' << bulk_integrand[i] << ',' << boundary_integrand[i] << '\n';
  return os.str();
}

FunctionalValue functional_j(const DensityPath& u, const TiltField& field, const ReservoirParams& params) {
  FunctionalValue out;
  const auto e = energy(u);
  out.energy = e.q_value;
  if (!std::isfinite(e.q_value)) {
    out.finite_energy = false;
    return out;
  }
  const std::size_t l = u.time_nodes();
  const std::size_t n = u.space_nodes();
  const double h = u.dx();
  const auto xs = unit_grid(u.intervals());
  const auto w = simpson_weights(n, h);
  const auto tw = time_weights(u);
  const auto& ts = u.times();

  auto pairing = [&](std::size_t i) {
    KahanSum s;
    for (std::size_t j = 0; j < n; ++j) s.add(w[j] * u.at(i, j) * field.value(ts[i], xs[j]));
    return s.value();
  };
  KahanSum total;
  total.add(pairing(l - 1) - pairing(0));
  // -int <u, H_t>: midpoint in time per interval, so kinks of H at time nodes are exact.
  for (std::size_t i = 0; i + 1 < l; ++i) {
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    KahanSum s;
    for (std::size_t j = 0; j < n; ++j)
      s.add(w[j] * 0.5 * (u.at(i, j) + u.at(i + 1, j)) * field.time_derivative(tm, xs[j]));
    total.add(-(ts[i + 1] - ts[i]) * s.value());
  }
  for (std::size_t i = 0; i < l; ++i) {
    const auto ux = u.space_gradient(i);
    KahanSum s;
    for (std::size_t j = 0; j < n; ++j) {
      const double hx = field.gradient(ts[i], xs[j]);
      s.add(w[j] * (ux[j] * hx - mobility(u.at(i, j)) * hx * hx));
    }
    const double b = boundary_b(left_inputs(params, u.trace_left(i), field.value(ts[i], 0.0))) +
                     boundary_b(right_inputs(params, u.trace_right(i), field.value(ts[i], 1.0)));
    total.add(tw[i] * (s.value() - b));
  }
  out.value = total.value();
  return out;
}

DirectRate rate_direct(const DensityPath& u, const ReservoirParams& params) {
  params.validate();
  require_interior(u);
  const std::size_t l = u.time_nodes();
  const std::size_t n = u.space_nodes();
  const double h = u.dx();
  DirectRate out;
  out.field = DensityPath(u.times(), u.intervals());
  out.field_gradient = DensityPath(u.times(), u.intervals());
  auto& br = out.breakdown;
  br.times = u.times();
  br.bulk_integrand.resize(l);
  br.boundary_integrand.resize(l);

  double g0 = 0.0, h0 = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    const Slice sl = make_slice(u, i);
    // G(x) = g0 + base(x); H(x) = h0 + g0 W(x) + V(x).
    std::vector<double> base(n), vi(n);
    for (std::size_t j = 0; j < n; ++j) {
      base[j] = 0.5 * (sl.ux[j] - sl.ux[0]) - 0.5 * sl.s[j];
      vi[j] = base[j] * sl.inv_sigma[j];
    }
    const auto v = cumulative_integral(vi, h);
    const double w1 = sl.w.back(), v1 = v.back(), base1 = base.back();
    const double u0 = sl.u.front(), u1 = sl.u.back();
    auto residual = [&](double g, double hh, double& f1, double& f2) {
      const double h1 = hh + g * w1 + v1;
      f1 = sl.ux.front() - 2.0 * g + boundary_p(left_inputs(params, u0, hh));
      f2 = sl.ux.back() - 2.0 * (g + base1) - boundary_p(right_inputs(params, u1, h1));
    };
    double f1, f2;
    residual(g0, h0, f1, f2);
    double norm = std::hypot(f1, f2);
    for (int it = 0; it < 100 && norm > 1e-13; ++it) {
      const double pa = boundary_p_prime(left_inputs(params, u0, h0));
      const double pb = boundary_p_prime(right_inputs(params, u1, h0 + g0 * w1 + v1));
      // Jacobian [[-2, pa], [-2 - pb w1, -pb]]; its determinant is positive.
      const double j11 = -2.0, j12 = pa, j21 = -2.0 - pb * w1, j22 = -pb;
      const double det = j11 * j22 - j12 * j21;
      const double dg = (f1 * j22 - j12 * f2) / det;
      const double dh = (j11 * f2 - j21 * f1) / det;
      double step = 1.0;
      for (int bt = 0; bt < 60; ++bt) {
        double n1, n2;
        residual(g0 - step * dg, h0 - step * dh, n1, n2);
        const double trial = std::hypot(n1, n2);
        if (std::isfinite(trial) && trial <= (1.0 - 1e-4 * step) * norm) {
          g0 -= step * dg;
          h0 -= step * dh;
          f1 = n1;
          f2 = n2;
          norm = trial;
          break;
        }
        step *= 0.5;
        if (bt == 59) it = 100;
      }
    }
    const double scale = 1.0 + std::abs(sl.ux.front()) + std::abs(sl.ux.back());
    if (!(norm <= 1e-9 * scale)) throw NumericError("rate_direct: Newton failed, residual " + std::to_string(norm));
    br.max_residual = std::max(br.max_residual, norm);

    std::vector<double> bulk(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double g = g0 + base[j];
      bulk[j] = g * g * sl.inv_sigma[j];
      out.field.at(i, j) = h0 + g0 * sl.w[j] + v[j];
      out.field_gradient.at(i, j) = g * sl.inv_sigma[j];
    }
    const double h1 = out.field.at(i, n - 1);
    br.bulk_integrand[i] = simpson(bulk, h);
    br.boundary_integrand[i] = boundary_c(left_inputs(params, u0, h0)) + boundary_c(right_inputs(params, u1, h1));
  }
  const auto tw = time_weights(u);
  KahanSum bulk, bdry;
  for (std::size_t i = 0; i < l; ++i) {
    bulk.add(tw[i] * br.bulk_integrand[i]);
    bdry.add(tw[i] * br.boundary_integrand[i]);
  }
  br.i_bulk = bulk.value();
  br.i_boundary = bdry.value();
  br.i_total = br.i_bulk + br.i_boundary;
  const auto e = energy(u);
  br.energy = e.q_value;
  br.strong_energy = e.strong_energy;
  return out;
}

BoundaryLegendre::BoundaryLegendre(const ReservoirParams& params, double u0, double u1, double zeta)
    : params_(params), u0_(u0), u1_(u1), zeta_(zeta) {}

BoundaryLegendre::Result BoundaryLegendre::phi(double a, double b, double x0, double y0) const {
  return maximize(a, b, x0, y0, false);
}

BoundaryLegendre::Result BoundaryLegendre::phi_hat(double a, double b) const {
  return maximize(a, b, 0.0, 0.0, true);
}

BoundaryLegendre::Result BoundaryLegendre::maximize(double a, double b, double x, double y, bool use_q) const {
  const auto li = [&](double m) { return left_inputs(params_, u0_, m); };
  const auto ri = [&](double m) { return right_inputs(params_, u1_, m); };
  const double shift_l = use_q ? (params_.alpha - u0_) / params_.cap_a : 0.0;
  const double shift_r = use_q ? (params_.beta - u1_) / params_.cap_b : 0.0;
  auto objective = [&](double xx, double yy) {
    const double cost_l = use_q ? boundary_q(li(xx)) : boundary_b(li(xx));
    const double cost_r = use_q ? boundary_q(ri(yy)) : boundary_b(ri(yy));
    return a * xx + b * yy - zeta_ * (xx - yy) * (xx - yy) - cost_l - cost_r;
  };
  Result r;
  double value = objective(x, y);
  for (int it = 0; it < 200; ++it) {
    const double gx = a - 2.0 * zeta_ * (x - y) - (boundary_p(li(x)) - shift_l);
    const double gy = b + 2.0 * zeta_ * (x - y) - (boundary_p(ri(y)) - shift_r);
    r.gradient_norm = std::hypot(gx, gy);
    if (r.gradient_norm < 1e-13 * (1.0 + std::abs(a) + std::abs(b))) break;
    // Negative Hessian [[2z + p'_l, -2z], [-2z, 2z + p'_r]] is positive definite.
    const double hxx = 2.0 * zeta_ + boundary_p_prime(li(x));
    const double hyy = 2.0 * zeta_ + boundary_p_prime(ri(y));
    const double hxy = -2.0 * zeta_;
    const double det = hxx * hyy - hxy * hxy;
    const double dx = (hyy * gx - hxy * gy) / det;
    const double dy = (hxx * gy - hxy * gx) / det;
    const double slope = gx * dx + gy * dy;
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const double trial = objective(x + step * dx, y + step * dy);
      if (std::isfinite(trial) && trial >= value + 1e-4 * step * slope) {
        x += step * dx;
        y += step * dy;
        moved = true;
        value = trial;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  if (!(r.gradient_norm < 1e-7 * (1.0 + std::abs(a) + std::abs(b))))
    throw NumericError("boundary Legendre transform: Newton stalled, gradient " + std::to_string(r.gradient_norm));
  r.value = value;
  r.x = x;
  r.y = y;
  return r;
}

DecomposedRate rate_decomposed(const DensityPath& u, const ReservoirParams& params) {
  params.validate();
  require_interior(u);
  const std::size_t l = u.time_nodes();
  const std::size_t n = u.space_nodes();
  const double h = u.dx();
  DecomposedRate out;
  auto& dec = out.decomposition;
  auto& br = out.breakdown;
  dec.times = u.times();
  dec.xi = DensityPath(u.times(), u.intervals());
  dec.m_field = DensityPath(u.times(), u.intervals());
  br.times = u.times();
  br.bulk_integrand.resize(l);
  br.boundary_integrand.resize(l);
  double x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    const Slice sl = make_slice(u, i);
    const double z = sl.w.back();
    const double zeta = 1.0 / z;
    std::vector<double> one_minus_xi(n), xi(n), grad_term(n), p_over_sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
      xi[j] = sl.w[j] / z;
      dec.xi.at(i, j) = xi[j];
      one_minus_xi[j] = sl.ut[j] * (1.0 - xi[j]);
      grad_term[j] = sl.ux[j] * sl.inv_sigma[j] / z;
      p_over_sigma[j] = -sl.s[j] * sl.inv_sigma[j];
      xi[j] *= sl.ut[j];
    }
    const double flux = simpson(grad_term, h);
    const double a = simpson(one_minus_xi, h) - flux;
    const double b = simpson(xi, h) + flux;
    const double shift = simpson(p_over_sigma, h) / z;
    std::vector<double> bulk(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double m = -sl.s[j] - shift;
      dec.m_field.at(i, j) = m;
      bulk[j] = (m + sl.ux[j]) * (m + sl.ux[j]) * sl.inv_sigma[j];
    }
    const double lo = logit(sl.u.back()) - logit(sl.u.front());
    const double r = lo * lo / z;
    const BoundaryLegendre legendre(params, sl.u.front(), sl.u.back(), zeta);
    const auto res = legendre.phi(a, b, x, y);
    x = res.x;
    y = res.y;
    out.max_gradient = std::max(out.max_gradient, res.gradient_norm);
    dec.zeta.push_back(zeta);
    dec.a.push_back(a);
    dec.b.push_back(b);
    dec.r.push_back(r);
    br.bulk_integrand[i] = 0.25 * (simpson(bulk, h) - r);
    br.boundary_integrand[i] = res.value;
  }
  const auto tw = time_weights(u);
  KahanSum bulk, bdry;
  for (std::size_t i = 0; i < l; ++i) {
    bulk.add(tw[i] * br.bulk_integrand[i]);
    bdry.add(tw[i] * br.boundary_integrand[i]);
  }
  br.i_bulk = bulk.value();
  br.i_boundary = bdry.value();
  br.i_total = br.i_bulk + br.i_boundary;
  const auto e = energy(u);
  br.energy = e.q_value;
  br.strong_energy = e.strong_energy;
  return out;
}

EnergyValue energy(const DensityPath& u) {
  const std::size_t l = u.time_nodes();
  const auto tw = trapezoid_weights(u.times());
  KahanSum q, strong;
  for (std::size_t i = 0; i < l; ++i) {
    const auto g = u.space_gradient(i);
    std::vector<double> a(g.size()), b(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double v = std::clamp(u.at(i, j), 1e-12, 1.0 - 1e-12);
      a[j] = g[j] * g[j];
      b[j] = a[j] / mobility(v);
    }
    const double wi = l == 1 ? 0.0 : tw[i];
    q.add(wi * simpson(a, u.dx()));
    strong.add(wi * simpson(b, u.dx()));
  }
  return {0.5 * q.value(), strong.value()};
}

PathCostReport path_cost_algebra_check(const DensityPath& u, const ReservoirParams& params, double split) {
  const auto& ts = u.times();
  std::size_t s = 0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (std::abs(ts[i] - split) < std::abs(ts[s] - split)) s = i;
  s = std::clamp<std::size_t>(s, 2, ts.size() - 3);
  PathCostReport r;
  r.i_full = rate_direct(u, params).breakdown.i_total;
  r.i_first = rate_direct(u.window(0, s), params).breakdown.i_total;
  r.i_second = rate_direct(u.window(s, ts.size() - 1), params).breakdown.i_total;
  r.tolerance = 1e-3 * (1.0 + r.i_full);
  r.subadditive = r.i_full <= r.i_first + r.i_second + r.tolerance;
  r.restriction = r.i_first <= r.i_full + r.tolerance;
  r.additivity_gap = r.i_full - r.i_first - r.i_second;
  return r;
}

}  // namespace robin_sep
