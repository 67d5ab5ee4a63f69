#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "robin_sep/errors.hpp"
#include "robin_sep/numerics.hpp"
#include "robin_sep/rate.hpp"

namespace robin_sep {
namespace {

/// Piecewise-linear hat functions on a uniform grid of [t0, t1].
struct Hats {
  double t0, step;
  std::size_t count;

  double node(std::size_t a) const { return t0 + step * static_cast<double>(a); }
  /// The (at most two) hats that are nonzero at t, with their values.
  std::vector<std::pair<std::size_t, double>> at(double t) const {
    const double pos = std::clamp((t - t0) / step, 0.0, static_cast<double>(count - 1));
    const auto a = std::min(static_cast<std::size_t>(pos), count - 2);
    const double w = pos - static_cast<double>(a);
    std::vector<std::pair<std::size_t, double>> out;
    if (1.0 - w > 0.0) out.emplace_back(a, 1.0 - w);
    if (w > 0.0) out.emplace_back(a + 1, w);
    return out;
  }
  /// Derivatives of the hats on the interval containing t (t not a node).
  std::vector<std::pair<std::size_t, double>> slope(double t) const {
    const double pos = std::clamp((t - t0) / step, 0.0, static_cast<double>(count - 1));
    const auto a = std::min(static_cast<std::size_t>(pos), count - 2);
    return {{a, -1.0 / step}, {a + 1, 1.0 / step}};
  }
};

}  // namespace

std::string VariationalRate::coefficients_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "i,t,k,coefficient\n";
  for (std::size_t a = 0; a < hat_nodes.size(); ++a)
    for (std::size_t k = 0; k < spatial_modes; ++k)
      os << a << ',' << hat_nodes[a] << ',' << k << ',' << coefficients[a * spatial_modes + k] << '\n';
  return os.str();
}

std::string VariationalRate::trace_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "iteration,value,gradient_norm,step\n";
  for (const auto& s : trace) os << s.iteration << ',' << s.value << ',' << s.gradient_norm << ',' << s.step << '\n';
  return os.str();
}

VariationalRate rate_variational(const DensityPath& u, const ReservoirParams& params,
                                 const VariationalOptions& options) {
  params.validate();
  if (options.time_hats < 2) throw InvalidArgument("need at least two time hats");
  if (u.time_nodes() < 2) throw InvalidArgument("path needs at least two time nodes");
  const std::size_t l = u.time_nodes();
  const std::size_t n = u.space_nodes();
  const std::size_t ns = options.cosine_modes + 2;
  const std::size_t nh = options.time_hats;
  const std::size_t dim = nh * ns;
  const auto& ts = u.times();
  const Hats hats{ts.front(), (ts.back() - ts.front()) / static_cast<double>(nh - 1), nh};
  const auto xs = unit_grid(u.intervals());
  const auto w = simpson_weights(n, u.dx());
  const auto tw = trapezoid_weights(ts);

  // Spatial modes psi = {1, x, cos(k pi x)} and their derivatives.
  Eigen::MatrixXd psi(ns, n), dpsi(ns, n);
  Eigen::VectorXd psi0(ns), psi1(ns);
  for (std::size_t j = 0; j < n; ++j) {
    psi(0, j) = 1.0;
    dpsi(0, j) = 0.0;
    psi(1, j) = xs[j];
    dpsi(1, j) = 1.0;
    for (std::size_t k = 1; k + 1 < ns; ++k) {
      const double q = static_cast<double>(k) * std::numbers::pi;
      psi(k + 1, j) = std::cos(q * xs[j]);
      dpsi(k + 1, j) = -q * std::sin(q * xs[j]);
    }
  }
  for (std::size_t k = 0; k < ns; ++k) {
    psi0(k) = k == 1 ? 0.0 : 1.0;
    psi1(k) = k < 2 ? 1.0 : ((k - 1) % 2 == 0 ? 1.0 : -1.0);
  }
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(n));

  Eigen::VectorXd lin = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  Eigen::MatrixXd quad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<Eigen::VectorXd> pairing(l);
  auto add_block = [&](std::size_t a, const Eigen::VectorXd& v, double scale) {
    lin.segment(static_cast<Eigen::Index>(a * ns), static_cast<Eigen::Index>(ns)) += scale * v;
  };
  for (std::size_t i = 0; i < l; ++i) {
    const auto row = u.row(i);
    const Eigen::Map<const Eigen::VectorXd> ui(row.data(), static_cast<Eigen::Index>(n));
    const auto gx = u.space_gradient(i);
    const Eigen::Map<const Eigen::VectorXd> uxi(gx.data(), static_cast<Eigen::Index>(n));
    pairing[i] = psi * wv.cwiseProduct(ui);
    const Eigen::VectorXd grad_pair = dpsi * wv.cwiseProduct(uxi);
    Eigen::VectorXd ws(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) ws(static_cast<Eigen::Index>(j)) = w[j] * mobility(row[j]);
    const Eigen::MatrixXd si = dpsi * ws.asDiagonal() * dpsi.transpose();
    const auto active = hats.at(ts[i]);
    for (const auto& [a, ha] : active) {
      add_block(a, grad_pair, tw[i] * ha);
      for (const auto& [b, hb] : active)
        quad.block(static_cast<Eigen::Index>(a * ns), static_cast<Eigen::Index>(b * ns),
                   static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns)) += tw[i] * ha * hb * si;
    }
  }
  for (const auto& [a, ha] : hats.at(ts.back())) add_block(a, pairing[l - 1], ha);
  for (const auto& [a, ha] : hats.at(ts.front())) add_block(a, pairing[0], -ha);
  for (std::size_t i = 0; i + 1 < l; ++i) {
    const double dt = ts[i + 1] - ts[i];
    const Eigen::VectorXd mid = 0.5 * (pairing[i] + pairing[i + 1]);
    for (const auto& [a, slope] : hats.slope(0.5 * (ts[i] + ts[i + 1]))) add_block(a, mid, -dt * slope);
  }

  // Boundary values H(t_i, 0) and H(t_i, 1) are linear in the coefficients.
  auto boundary_values = [&](const Eigen::VectorXd& c, std::vector<double>& h0, std::vector<double>& h1) {
    std::vector<double> b0(nh), b1(nh);
    for (std::size_t a = 0; a < nh; ++a) {
      const auto seg = c.segment(static_cast<Eigen::Index>(a * ns), static_cast<Eigen::Index>(ns));
      b0[a] = psi0.dot(seg);
      b1[a] = psi1.dot(seg);
    }
    h0.assign(l, 0.0);
    h1.assign(l, 0.0);
    for (std::size_t i = 0; i < l; ++i)
      for (const auto& [a, ha] : hats.at(ts[i])) {
        h0[i] += ha * b0[a];
        h1[i] += ha * b1[a];
      }
  };
  auto value = [&](const Eigen::VectorXd& c) {
    std::vector<double> h0, h1;
    boundary_values(c, h0, h1);
    KahanSum s;
    s.add(lin.dot(c));
    s.add(-c.dot(quad * c));
    for (std::size_t i = 0; i < l; ++i)
      s.add(-tw[i] * (boundary_b(left_inputs(params, u.trace_left(i), h0[i])) +
                      boundary_b(right_inputs(params, u.trace_right(i), h1[i]))));
    return s.value();
  };

  VariationalRate out;
  out.spatial_modes = ns;
  for (std::size_t a = 0; a < nh; ++a) out.hat_nodes.push_back(hats.node(a));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  double current = value(c);
  out.trace.push_back({0, current, 0.0, 0.0});
  for (int it = 1; it <= options.max_iterations; ++it) {
    std::vector<double> h0, h1;
    boundary_values(c, h0, h1);
    Eigen::VectorXd grad = lin - 2.0 * quad * c;
    Eigen::MatrixXd neg_hess = 2.0 * quad;
    for (std::size_t i = 0; i < l; ++i) {
      const auto li = left_inputs(params, u.trace_left(i), h0[i]);
      const auto ri = right_inputs(params, u.trace_right(i), h1[i]);
      const double pl = boundary_p(li), pr = boundary_p(ri);
      const double dl = boundary_p_prime(li), dr = boundary_p_prime(ri);
      const auto active = hats.at(ts[i]);
      for (const auto& [a, ha] : active) {
        const auto ia = static_cast<Eigen::Index>(a * ns);
        grad.segment(ia, static_cast<Eigen::Index>(ns)) -= tw[i] * ha * (pl * psi0 + pr * psi1);
        for (const auto& [b, hb] : active) {
          const auto ib = static_cast<Eigen::Index>(b * ns);
          neg_hess.block(ia, ib, static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns)) +=
              tw[i] * ha * hb * (dl * psi0 * psi0.transpose() + dr * psi1 * psi1.transpose());
        }
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
    Eigen::VectorXd dir;
    if (llt.info() == Eigen::Success) {
      dir = llt.solve(grad);
    } else {
      dir = neg_hess.ldlt().solve(grad);
    }
    double decrement = grad.dot(dir);
    if (!(decrement > 0.0) || !dir.allFinite()) {
      dir = grad;
      decrement = grad.squaredNorm();
    }
    const double gnorm = grad.norm();
    if (0.5 * decrement < options.gradient_tolerance) {
      out.converged = true;
      out.trace.push_back({it, current, gnorm, 0.0});
      break;
    }
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      const Eigen::VectorXd trial = c + step * dir;
      const double v = value(trial);
      if (std::isfinite(v) && v >= current + 1e-4 * step * decrement) {
        if (v < current) out.monotone = false;
        c = trial;
        current = v;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    out.trace.push_back({it, current, gnorm, accepted ? step : 0.0});
    if (!accepted) break;
  }
  out.value = current;
  out.coefficients.assign(c.data(), c.data() + c.size());
  return out;
}

}  // namespace robin_sep
