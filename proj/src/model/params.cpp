#include "robin_sep/params.hpp"

#include <cmath>
#include <sstream>

#include "robin_sep/errors.hpp"

namespace robin_sep {

ReservoirParams ReservoirParams::make(double alpha, double beta, double cap_a, double cap_b) {
  ReservoirParams p{alpha, beta, cap_a, cap_b};
  p.validate();
  return p;
}

void ReservoirParams::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must satisfy 0 < alpha");
  if (!(beta < 1.0)) throw InvalidArgument("beta must satisfy beta < 1");
  if (!(alpha <= beta)) throw InvalidArgument("alpha <= beta is required");
  if (!(cap_a > 0.0) || !std::isfinite(cap_a)) throw InvalidArgument("A must be positive");
  if (!(cap_b > 0.0) || !std::isfinite(cap_b)) throw InvalidArgument("B must be positive");
}

std::string ReservoirParams::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "alpha=" << alpha << " beta=" << beta << " A=" << cap_a << " B=" << cap_b;
  return os.str();
}

}  // namespace robin_sep
