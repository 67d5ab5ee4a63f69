#pragma once

#include <vector>

#include "robin_sep/lattice.hpp"
#include "robin_sep/params.hpp"
#include "robin_sep/tilt_field.hpp"

namespace robin_sep {

/// Jump rates of every transition out of a configuration.
/// bond[k-1] is the exchange rate across the bond (k, k+1), k = 1..N-2.
struct RateTable {
  std::vector<double> bond;
  double left_flip = 0.0;
  double right_flip = 0.0;

  double total() const;
  bool operator==(const RateTable&) const = default;
};

/// Symmetric exclusion with reservoirs.
RateTable ssep_rates(const LatticeConfiguration& config, const ReservoirParams& params);

/// Weakly asymmetric exclusion driven by the field at time t.
RateTable wasep_rates(const LatticeConfiguration& config, const ReservoirParams& params,
                      const TiltField& field, double t);

}  // namespace robin_sep
