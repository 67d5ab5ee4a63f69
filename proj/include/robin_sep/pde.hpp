#pragma once

#include <functional>
#include <vector>

#include "robin_sep/density_path.hpp"
#include "robin_sep/params.hpp"
#include "robin_sep/spectral.hpp"
#include "robin_sep/tilt_field.hpp"

namespace robin_sep {

using Profile = std::function<double(double)>;

struct StationaryProfile {
  double intercept = 0.0;
  double slope = 0.0;
  double operator()(double x) const { return intercept + slope * x; }
};

StationaryProfile stationary_profile(const ReservoirParams& params);

struct PdeGrid {
  std::size_t space_intervals = 512;
  std::size_t time_steps = 2048;
  /// Store every k-th time step in the returned path.
  std::size_t store_every = 1;
};

/// Crank-Nicolson for u_t = u_xx with u'(0) = (u(0) - alpha)/A and
/// u'(1) = (beta - u(1))/B, in finite-volume form (half cells at the two
/// boundary nodes, equivalent to ghost nodes). The first two steps are split
/// into four backward-Euler half steps to damp rough initial data.
DensityPath solve_hydrodynamic(const Profile& gamma, const ReservoirParams& params,
                               double horizon, const PdeGrid& grid = {});

enum class HomogeneousMethod { fd, spectral };

/// u_t = u_xx with u'(0) = u(0)/A, u'(1) = -u(1)/B. The spectral method
/// evaluates the Robin semigroup with `modes` eigenfunctions.
DensityPath solve_robin_homogeneous(const Profile& phi, const ReservoirParams& params,
                                    double horizon, HomogeneousMethod method,
                                    const PdeGrid& grid = {}, std::size_t modes = 128);

struct ControlledOptions {
  PdeGrid grid;
  int max_halvings = 6;
};

/// u_t = u_xx - 2 (sigma(u) H_x)_x with boundary fluxes
/// u_x - 2 sigma H_x = -p_alpha(u, H) at 0 and = p_beta(u, H) at 1.
/// Diffusion is Crank-Nicolson (startup as above); the drift is explicit
/// second-order Adams-Bashforth in conservative form with face-averaged
/// mobility. Both boundary fluxes are affine in the trace, so they are
/// treated implicitly without iteration. If the solution leaves [0, 1] the
/// step is halved and the solve retried, at most max_halvings times, after
/// which NumericError is thrown.
DensityPath solve_controlled(const Profile& gamma, const ReservoirParams& params,
                             const TiltField& field, double horizon,
                             const ControlledOptions& options = {});

/// Per-step record of the boundary-flux mass balance of a controlled path:
/// (int u)(t_{i+1}) - (int u)(t_i) versus the trapezoidal integral of the
/// boundary fluxes.
std::vector<double> mass_balance_defect(const DensityPath& path, const ReservoirParams& params,
                                        const TiltField& field);

struct FreeEnergyLedger {
  std::vector<double> times;
  /// Cumulative left-hand side: bulk dissipation plus boundary terms.
  std::vector<double> lhs;
  /// int F0(gamma) - int F0(u_t).
  std::vector<double> rhs;
  double bulk = 0.0;
  double boundary = 0.0;
  double final_gap = 0.0;
};

/// Free-energy balance of a hydrodynamic path, with F0(r) = r log r +
/// (1 - r) log(1 - r). Throws NumericError if the path touches 0 or 1.
FreeEnergyLedger free_energy_diagnostic(const DensityPath& path, const ReservoirParams& params);

/// Weak-form residual of a path against the test function G(t, x):
/// <u_T, G_T> - <u_0, G_0> - int <u, G_t> - int <u, G_xx> (plus Robin and
/// drift terms for a field). Zero for exact solutions.
double weak_form_residual(const DensityPath& path, const ReservoirParams& params,
                          const TiltField* field,
                          const std::function<double(double, double)>& g,
                          const std::function<double(double, double)>& g_t,
                          const std::function<double(double, double)>& g_x,
                          const std::function<double(double, double)>& g_xx);

}  // namespace robin_sep
