#pragma once

#include <string>

namespace robin_sep {

/// Boundary reservoir constants. The left reservoir has density `alpha` and
/// coupling `cap_a`, the right one density `beta` and coupling `cap_b`.
struct ReservoirParams {
  double alpha = 0.5;
  double beta = 0.5;
  double cap_a = 1.0;
  double cap_b = 1.0;

  /// Validated constructor; throws InvalidArgument naming the violated
  /// invariant (0 < alpha <= beta < 1, cap_a > 0, cap_b > 0).
  static ReservoirParams make(double alpha, double beta, double cap_a, double cap_b);

  void validate() const;
  std::string describe() const;

  bool operator==(const ReservoirParams&) const = default;
};

/// Mobility of the exclusion process.
inline double mobility(double u) { return u * (1.0 - u); }

}  // namespace robin_sep
