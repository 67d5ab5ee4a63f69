#include "robin_sep/boundary_costs.hpp"

#include <cmath>

namespace robin_sep {

double boundary_b(const BoundaryCostInputs& in) {
  return ((1.0 - in.a) * in.rho * std::expm1(in.m) + in.a * (1.0 - in.rho) * std::expm1(-in.m)) / in.d;
}

double boundary_p(const BoundaryCostInputs& in) {
  return ((1.0 - in.a) * in.rho * std::exp(in.m) - in.a * (1.0 - in.rho) * std::exp(-in.m)) / in.d;
}

double boundary_p_prime(const BoundaryCostInputs& in) {
  return ((1.0 - in.a) * in.rho * std::exp(in.m) + in.a * (1.0 - in.rho) * std::exp(-in.m)) / in.d;
}

double boundary_c(const BoundaryCostInputs& in) {
  const double m = in.m;
  const double up = m * std::exp(m) - std::expm1(m);
  const double down = -std::expm1(-m) - m * std::exp(-m);
  return ((1.0 - in.a) * in.rho * up + in.a * (1.0 - in.rho) * down) / in.d;
}

double boundary_q(const BoundaryCostInputs& in) {
  const double m = in.m;
  return ((1.0 - in.a) * in.rho * (std::expm1(m) - m) + in.a * (1.0 - in.rho) * (std::expm1(-m) + m)) / in.d;
}

}  // namespace robin_sep
