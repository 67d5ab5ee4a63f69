#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "robin_sep/boundary_costs.hpp"
#include "robin_sep/density_path.hpp"
#include "robin_sep/params.hpp"
#include "robin_sep/tilt_field.hpp"

namespace robin_sep {

struct FunctionalValue {
  double value = 0.0;
  /// False when the path's measured energy is not finite; value is then
  /// meaningless and `energy` carries the measurement.
  bool finite_energy = true;
  double energy = 0.0;
};

/// J_{T,H}(u) = <u_T,H_T> - <u_0,H_0> - int <u, H_t> + int <u_x, H_x>
///              - int <sigma(u), H_x^2> - int [b_alpha(u(0),H(0)) + b_beta(u(1),H(1))].
FunctionalValue functional_j(const DensityPath& u, const TiltField& field,
                             const ReservoirParams& params);

struct RateBreakdown {
  double i_total = 0.0;
  double i_bulk = 0.0;
  double i_boundary = 0.0;
  std::vector<double> times;
  std::vector<double> bulk_integrand;
  std::vector<double> boundary_integrand;
  double energy = 0.0;
  double strong_energy = 0.0;
  /// Largest Newton residual over the time slices.
  double max_residual = 0.0;

  std::string to_json() const;
  /// CSV with columns t,bulk,boundary.
  std::string integrands_csv() const;
};

struct DirectRate {
  RateBreakdown breakdown;
  /// Recovered field H_t on the path grid (row-major like the path).
  DensityPath field;
  DensityPath field_gradient;
};

/// Closed-form rate on a smooth path. Per time slice, G = sigma(u) H_x obeys
/// 2 G_x = u_xx - u_t, so H is determined by (G(0), H(0)), which a 2-d
/// Newton fixes from the two boundary conditions
///   u_x(0) - 2 G(0) = -p_alpha(u(0), H(0)),  u_x(1) - 2 G(1) = p_beta(u(1), H(1)).
/// Then I = int int G^2/sigma + int [c_alpha(u(0),H(0)) + c_beta(u(1),H(1))].
/// Throws NumericError if Newton fails or u leaves (0, 1).
DirectRate rate_direct(const DensityPath& u, const ReservoirParams& params);

struct BoundaryDecomposition {
  std::vector<double> times;
  DensityPath xi;
  DensityPath m_field;
  std::vector<double> zeta;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> r;
};

struct DecomposedRate {
  RateBreakdown breakdown;
  BoundaryDecomposition decomposition;
  /// Largest gradient norm left by the Legendre Newton solves.
  double max_gradient = 0.0;
};

/// Legendre transform of the boundary cost at one time slice:
/// Phi(a, b) = sup_{x,y} a x + b y - zeta (x - y)^2 - b_alpha(u0, x) - b_beta(u1, y).
class BoundaryLegendre {
 public:
  BoundaryLegendre(const ReservoirParams& params, double u0, double u1, double zeta);

  struct Result {
    double value = 0.0;
    double x = 0.0;
    double y = 0.0;
    double gradient_norm = 0.0;
  };
  /// Damped Newton from (x0, y0). Throws NumericError when it stalls.
  Result phi(double a, double b, double x0 = 0.0, double y0 = 0.0) const;
  /// Same with q in place of b; phi(a, b) = phi_hat(a - (alpha - u0)/A, b - (beta - u1)/B).
  Result phi_hat(double a, double b) const;

 private:
  Result maximize(double a, double b, double x0, double y0, bool use_q) const;
  ReservoirParams params_;
  double u0_;
  double u1_;
  double zeta_;
};

/// Bulk/boundary split I = I1 + I2 with I1 = (1/4) int [ int (M + u_x)^2/sigma - R ]
/// and I2 = int Phi_t(a_t, b_t).
DecomposedRate rate_decomposed(const DensityPath& u, const ReservoirParams& params);

struct VariationalOptions {
  std::size_t time_hats = 33;
  std::size_t cosine_modes = 12;
  int max_iterations = 60;
  double gradient_tolerance = 1e-10;
};

struct AscentStep {
  int iteration = 0;
  double value = 0.0;
  double gradient_norm = 0.0;
  double step = 0.0;
};

struct VariationalRate {
  double value = 0.0;
  /// Coefficients ordered time-major: c[i * modes + k] multiplies
  /// hat_i(t) psi_k(x), psi = {1, x, cos(pi x), ..., cos(K pi x)}.
  std::vector<double> coefficients;
  std::vector<double> hat_nodes;
  std::size_t spatial_modes = 0;
  std::vector<AscentStep> trace;
  bool monotone = true;
  bool converged = false;

  /// CSV with columns i,t,k,coefficient.
  std::string coefficients_csv() const;
  /// CSV with columns iteration,value,gradient_norm,step.
  std::string trace_csv() const;
};

/// Maximises the concave map H -> J_{T,H}(u) over the tensor basis of time
/// hats on a uniform grid of [t_0, t_L] times {1, x, cos(k pi x)}. Each
/// step is a Newton direction with Armijo backtracking; a decrease in
/// value is recorded as a non-monotone step.
VariationalRate rate_variational(const DensityPath& u, const ReservoirParams& params,
                                 const VariationalOptions& options = {});

struct EnergyValue {
  double q_value = 0.0;
  double strong_energy = 0.0;
};

/// Q = (1/2) int int u_x^2 and int int u_x^2 / sigma(u) (mobility clamped at
/// 1e-12 from 0 and 1).
EnergyValue energy(const DensityPath& u);

struct PathCostReport {
  double i_full = 0.0;
  double i_first = 0.0;
  double i_second = 0.0;
  double tolerance = 0.0;
  bool subadditive = false;
  bool restriction = false;
  double additivity_gap = 0.0;
};

/// Checks I[0,T] <= I[0,S] + I[S,T] and I[0,S] <= I[0,T] with
/// tolerance 1e-3 (1 + I[0,T]). The split time is snapped to the nearest
/// time node.
PathCostReport path_cost_algebra_check(const DensityPath& u, const ReservoirParams& params,
                                       double split);

}  // namespace robin_sep
