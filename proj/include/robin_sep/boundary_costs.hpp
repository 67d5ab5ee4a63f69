#pragma once

#include "robin_sep/params.hpp"

namespace robin_sep {

/// Arguments of the boundary cost functions: reservoir density rho, coupling
/// d, boundary trace a and field value m.
struct BoundaryCostInputs {
  double rho = 0.5;
  double d = 1.0;
  double a = 0.5;
  double m = 0.0;
};

/// b = (1/D){(1-a) rho (e^M - 1) + a (1-rho)(e^{-M} - 1)}.
double boundary_b(const BoundaryCostInputs& in);
/// p = db/dM.
double boundary_p(const BoundaryCostInputs& in);
/// c = M p - b.
double boundary_c(const BoundaryCostInputs& in);
/// q = b - M (rho - a)/D.
double boundary_q(const BoundaryCostInputs& in);
/// dp/dM.
double boundary_p_prime(const BoundaryCostInputs& in);

inline BoundaryCostInputs left_inputs(const ReservoirParams& p, double trace, double m) {
  return {p.alpha, p.cap_a, trace, m};
}
inline BoundaryCostInputs right_inputs(const ReservoirParams& p, double trace, double m) {
  return {p.beta, p.cap_b, trace, m};
}

}  // namespace robin_sep
