#include "robin_sep/pde.hpp"

#include <algorithm>
#include <cmath>

#include "robin_sep/boundary_costs.hpp"
#include "robin_sep/errors.hpp"
#include "robin_sep/numerics.hpp"

namespace robin_sep {
namespace {

/// Reservoir data of the finite-volume scheme. Densities may be 0 here (the
/// homogeneous problem), so ReservoirParams validation does not apply.
struct RobinData {
  double rho_left;
  double rho_right;
  double cap_a;
  double cap_b;
};

/// Boundary fluxes J(0) = (c_l u0 - r_l)/A and J(1) = (r_r - c_r uM)/B.
struct BoundaryCoefficients {
  double c_l = 1.0, r_l = 0.0, c_r = 1.0, r_r = 0.0;
};

BoundaryCoefficients boundary_at(const RobinData& d, const TiltField* field, double t) {
  BoundaryCoefficients b;
  double h0 = 0.0, h1 = 0.0;
  if (field) {
    h0 = field->value(t, 0.0);
    h1 = field->value(t, 1.0);
  }
  const double e0 = std::exp(h0), e1 = std::exp(h1);
  b.c_l = d.rho_left * e0 + (1.0 - d.rho_left) / e0;
  b.r_l = d.rho_left * e0;
  b.c_r = d.rho_right * e1 + (1.0 - d.rho_right) / e1;
  b.r_r = d.rho_right * e1;
  return b;
}

class FiniteVolume {
 public:
  FiniteVolume(const RobinData& data, const TiltField* field, std::size_t m)
      : data_(data), field_(field), m_(m), h_(1.0 / static_cast<double>(m)) {
    volume_.assign(m + 1, h_);
    volume_.front() = volume_.back() = 0.5 * h_;
  }

  /// Drift contribution at every node: differences of the interior face
  /// fluxes -2 sigma(u_face) H_x(t, x_face).
  std::vector<double> drift(std::span<const double> u, double t) const {
    std::vector<double> d(m_ + 1, 0.0);
    if (!field_) return d;
    for (std::size_t j = 0; j < m_; ++j) {
      const double face = (static_cast<double>(j) + 0.5) * h_;
      const double flux = -2.0 * mobility(0.5 * (u[j] + u[j + 1])) * field_->gradient(t, face);
      d[j] += flux;
      d[j + 1] -= flux;
    }
    return d;
  }

  /// L u + g for the diffusion and boundary part.
  std::vector<double> apply(std::span<const double> u, double t) const {
    const auto b = boundary_at(data_, field_, t);
    std::vector<double> out(m_ + 1);
    out[0] = (u[1] - u[0]) / h_ - (b.c_l * u[0] - b.r_l) / data_.cap_a;
    for (std::size_t j = 1; j < m_; ++j) out[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / h_;
    out[m_] = (b.r_r - b.c_r * u[m_]) / data_.cap_b - (u[m_] - u[m_ - 1]) / h_;
    return out;
  }

  /// Solves (V - theta dt L(t)) u = rhs + theta dt g(t).
  std::vector<double> implicit_solve(std::vector<double> rhs, double theta_dt, double t) const {
    const auto b = boundary_at(data_, field_, t);
    const std::size_t n = m_ + 1;
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0);
    const double k = theta_dt / h_;
    for (std::size_t j = 1; j < m_; ++j) {
      lo[j] = -k;
      di[j] = volume_[j] + 2.0 * k;
      up[j] = -k;
    }
    di[0] = volume_[0] + k + theta_dt * b.c_l / data_.cap_a;
    up[0] = -k;
    rhs[0] += theta_dt * b.r_l / data_.cap_a;
    di[m_] = volume_[m_] + k + theta_dt * b.c_r / data_.cap_b;
    lo[m_] = -k;
    rhs[m_] += theta_dt * b.r_r / data_.cap_b;
    return solve_tridiagonal(lo, di, up, rhs);
  }

  const std::vector<double>& volume() const { return volume_; }

 private:
  RobinData data_;
  const TiltField* field_;
  std::size_t m_;
  double h_;
  std::vector<double> volume_;
};

bool admissible(std::span<const double> u, bool bounded) {
  for (double v : u) {
    if (!std::isfinite(v)) return false;
    if (bounded && (v < -1e-6 || v > 1.0 + 1e-6)) return false;
  }
  return true;
}

/// One attempt with `steps` time steps; returns false when the solution
/// becomes inadmissible. Two backward-Euler half steps replace CN for the
/// first two steps and for two steps after every field breakpoint.
bool integrate(const FiniteVolume& fv, std::vector<double> u, double horizon, std::size_t steps,
               std::size_t store_stride, bool has_field, bool bounded,
               const std::vector<double>& breakpoints, DensityPath& out) {
  const double dt = horizon / static_cast<double>(steps);
  const auto& vol = fv.volume();
  const std::size_t n = u.size();
  std::size_t stored = 0;
  auto store = [&](std::size_t step) {
    if (step % store_stride != 0) return;
    std::copy(u.begin(), u.end(), out.row(stored++).begin());
  };
  store(0);
  std::vector<double> drift_prev;
  std::size_t damped_until = 2;
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = horizon * static_cast<double>(step) / static_cast<double>(steps);
    const double t_next = horizon * static_cast<double>(step + 1) / static_cast<double>(steps);
    // A kink of the field in time excites the stiff modes CN does not damp,
    // so the damped start-up is repeated there.
    for (double bp : breakpoints)
      if (bp >= t - 1e-12 * horizon && bp < t_next - 1e-12 * horizon) damped_until = step + 2;
    const auto drift_now = has_field ? fv.drift(u, t) : std::vector<double>();
    if (step < damped_until) {
      // Two backward-Euler half steps; the drift is frozen at the step start.
      for (int half = 0; half < 2; ++half) {
        const double th = t + 0.5 * dt * half;
        const auto d = has_field && half == 1 ? fv.drift(u, th) : drift_now;
        std::vector<double> rhs(n);
        for (std::size_t j = 0; j < n; ++j) rhs[j] = vol[j] * u[j] + (has_field ? 0.5 * dt * d[j] : 0.0);
        u = fv.implicit_solve(std::move(rhs), 0.5 * dt, th + 0.5 * dt);
      }
    } else {
      const auto lu = fv.apply(u, t);
      std::vector<double> rhs(n);
      for (std::size_t j = 0; j < n; ++j) {
        rhs[j] = vol[j] * u[j] + 0.5 * dt * lu[j];
        if (has_field) rhs[j] += dt * (1.5 * drift_now[j] - 0.5 * drift_prev[j]);
      }
      u = fv.implicit_solve(std::move(rhs), 0.5 * dt, t_next);
    }
    drift_prev = drift_now;
    if (!admissible(u, bounded)) return false;
    store(step + 1);
  }
  return true;
}

DensityPath solve_scheme(const Profile& gamma, const RobinData& data, const TiltField* field,
                         double horizon, const PdeGrid& grid, int max_halvings, bool bounded) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (grid.space_intervals < 2 || grid.time_steps < 1 || grid.store_every < 1 ||
      grid.time_steps % grid.store_every != 0)
    throw InvalidArgument("invalid PDE grid");
  const std::size_t m = grid.space_intervals;
  std::vector<double> u0(m + 1);
  for (std::size_t j = 0; j <= m; ++j) u0[j] = gamma(static_cast<double>(j) / static_cast<double>(m));
  if (!admissible(u0, false)) throw InvalidArgument("initial profile has non-finite values");

  const std::size_t stored = grid.time_steps / grid.store_every;
  std::vector<double> times(stored + 1);
  for (std::size_t i = 0; i <= stored; ++i)
    times[i] = horizon * static_cast<double>(i) / static_cast<double>(stored);
  DensityPath out(times, m);
  const bool has_field = field && !field->is_zero();
  const FiniteVolume fv(data, has_field ? field : nullptr, m);
  const std::vector<double> breakpoints = has_field ? field->time_breakpoints() : std::vector<double>();
  for (int halving = 0; halving <= max_halvings; ++halving) {
    const std::size_t factor = std::size_t{1} << halving;
    if (integrate(fv, u0, horizon, grid.time_steps * factor, grid.store_every * factor, has_field,
                  bounded, breakpoints, out))
      return out;
  }
  throw NumericError("PDE solution left the admissible range after " + std::to_string(max_halvings) +
                     " step halvings");
}

RobinData robin_data(const ReservoirParams& p) { return {p.alpha, p.beta, p.cap_a, p.cap_b}; }

double logit(double u) { return std::log(u / (1.0 - u)); }
double f0(double r) { return r * std::log(r) + (1.0 - r) * std::log1p(-r); }

}  // namespace

StationaryProfile stationary_profile(const ReservoirParams& p) {
  p.validate();
  const double w = 1.0 + p.cap_a + p.cap_b;
  return {(p.alpha * (1.0 + p.cap_b) + p.beta * p.cap_a) / w, (p.beta - p.alpha) / w};
}

DensityPath solve_hydrodynamic(const Profile& gamma, const ReservoirParams& params, double horizon,
                               const PdeGrid& grid) {
  params.validate();
  return solve_scheme(gamma, robin_data(params), nullptr, horizon, grid, 0, false);
}

DensityPath solve_robin_homogeneous(const Profile& phi, const ReservoirParams& params, double horizon,
                                    HomogeneousMethod method, const PdeGrid& grid, std::size_t modes) {
  const RobinData data{0.0, 0.0, params.cap_a, params.cap_b};
  if (method == HomogeneousMethod::fd) return solve_scheme(phi, data, nullptr, horizon, grid, 0, false);

  const std::size_t m = grid.space_intervals;
  const auto basis = solve_eigenvalues(params, modes);
  const auto f = GridFunction::sample(m, phi);
  const auto coef = robin_coefficients(basis, f);
  std::vector<std::vector<double>> modes_grid(modes);
  for (std::size_t k = 0; k < modes; ++k) modes_grid[k] = eigenfunction_grid(basis, k + 1, m).values;
  const std::size_t stored = grid.time_steps / grid.store_every;
  std::vector<double> times(stored + 1);
  for (std::size_t i = 0; i <= stored; ++i)
    times[i] = horizon * static_cast<double>(i) / static_cast<double>(stored);
  DensityPath out(times, m);
  for (std::size_t i = 0; i <= stored; ++i) {
    auto row = out.row(i);
    for (std::size_t k = 0; k < modes; ++k) {
      const double e = coef[k] * std::exp(-basis.eigenvalues[k] * times[i]);
      for (std::size_t j = 0; j <= m; ++j) row[j] += e * modes_grid[k][j];
    }
  }
  return out;
}

DensityPath solve_controlled(const Profile& gamma, const ReservoirParams& params, const TiltField& field,
                             double horizon, const ControlledOptions& options) {
  params.validate();
  return solve_scheme(gamma, robin_data(params), &field, horizon, options.grid, options.max_halvings,
                      true);
}

std::vector<double> mass_balance_defect(const DensityPath& path, const ReservoirParams& params,
                                        const TiltField& field) {
  const auto w = trapezoid_weights(unit_grid(path.intervals()));
  auto mass = [&](std::size_t i) {
    KahanSum s;
    for (std::size_t j = 0; j < w.size(); ++j) s.add(w[j] * path.at(i, j));
    return s.value();
  };
  auto net_flux = [&](std::size_t i) {
    const double t = path.times()[i];
    const double j0 = -boundary_p(left_inputs(params, path.trace_left(i), field.value(t, 0.0)));
    const double j1 = boundary_p(right_inputs(params, path.trace_right(i), field.value(t, 1.0)));
    return j1 - j0;
  };
  std::vector<double> defect;
  for (std::size_t i = 0; i + 1 < path.time_nodes(); ++i) {
    const double dt = path.times()[i + 1] - path.times()[i];
    defect.push_back(mass(i + 1) - mass(i) - 0.5 * dt * (net_flux(i) + net_flux(i + 1)));
  }
  return defect;
}

FreeEnergyLedger free_energy_diagnostic(const DensityPath& path, const ReservoirParams& params) {
  if (path.min_value() <= 0.0 || path.max_value() >= 1.0)
    throw NumericError("free-energy diagnostic needs a path inside (0, 1)");
  const double h = path.dx();
  const std::size_t l = path.time_nodes();
  std::vector<double> bulk(l), bdry(l), entropy(l);
  for (std::size_t i = 0; i < l; ++i) {
    const auto g = path.space_gradient(i);
    const auto u = path.row(i);
    std::vector<double> integrand(u.size()), f(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      integrand[j] = g[j] * g[j] / mobility(u[j]);
      f[j] = f0(u[j]);
    }
    bulk[i] = simpson(integrand, h);
    const double u0 = u.front(), u1 = u.back();
    bdry[i] = (u0 - params.alpha) * logit(u0) / params.cap_a + (u1 - params.beta) * logit(u1) / params.cap_b;
    entropy[i] = simpson(f, h);
  }
  FreeEnergyLedger ledger;
  ledger.times = path.times();
  ledger.lhs.assign(l, 0.0);
  ledger.rhs.assign(l, 0.0);
  KahanSum b_acc, s_acc;
  for (std::size_t i = 1; i < l; ++i) {
    const double dt = path.times()[i] - path.times()[i - 1];
    b_acc.add(0.5 * dt * (bulk[i] + bulk[i - 1]));
    s_acc.add(0.5 * dt * (bdry[i] + bdry[i - 1]));
    ledger.lhs[i] = b_acc.value() + s_acc.value();
    ledger.rhs[i] = entropy[0] - entropy[i];
  }
  ledger.bulk = b_acc.value();
  ledger.boundary = s_acc.value();
  ledger.final_gap = ledger.lhs.back() - ledger.rhs.back();
  return ledger;
}

double weak_form_residual(const DensityPath& path, const ReservoirParams& params, const TiltField* field,
                          const std::function<double(double, double)>& g,
                          const std::function<double(double, double)>& g_t,
                          const std::function<double(double, double)>& g_x,
                          const std::function<double(double, double)>& g_xx) {
  const std::size_t l = path.time_nodes();
  const std::size_t n = path.space_nodes();
  const double h = path.dx();
  const auto xs = unit_grid(path.intervals());
  const auto w = simpson_weights(n, h);
  auto pairing = [&](std::size_t i) {
    const double t = path.times()[i];
    KahanSum s;
    for (std::size_t j = 0; j < n; ++j) s.add(w[j] * path.at(i, j) * g(t, xs[j]));
    return s.value();
  };
  std::vector<double> integrand(l);
  for (std::size_t i = 0; i < l; ++i) {
    const double t = path.times()[i];
    KahanSum s;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = path.at(i, j);
      double v = u * (g_t(t, xs[j]) + g_xx(t, xs[j]));
      if (field) v += 2.0 * mobility(u) * field->gradient(t, xs[j]) * g_x(t, xs[j]);
      s.add(w[j] * v);
    }
    const double u0 = path.trace_left(i), u1 = path.trace_right(i);
    const double h0 = field ? field->value(t, 0.0) : 0.0;
    const double h1 = field ? field->value(t, 1.0) : 0.0;
    const double j0 = -boundary_p(left_inputs(params, u0, h0));
    const double j1 = boundary_p(right_inputs(params, u1, h1));
    s.add(j1 * g(t, 1.0) - j0 * g(t, 0.0) - u1 * g_x(t, 1.0) + u0 * g_x(t, 0.0));
    integrand[i] = s.value();
  }
  const auto tw = trapezoid_weights(path.times());
  KahanSum total;
  total.add(pairing(l - 1) - pairing(0));
  for (std::size_t i = 0; i < l; ++i) total.add(-tw[i] * integrand[i]);
  return total.value();
}

}  // namespace robin_sep
