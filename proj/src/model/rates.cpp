#include "robin_sep/rates.hpp"

#include <cmath>

namespace robin_sep {

double RateTable::total() const {
  double s = left_flip + right_flip;
  for (double r : bond) s += r;
  return s;
}

RateTable ssep_rates(const LatticeConfiguration& config, const ReservoirParams& params) {
  const int n = config.n_scale();
  const double n2 = static_cast<double>(n) * n;
  RateTable table;
  table.bond.resize(static_cast<std::size_t>(n - 2));
  for (int k = 1; k <= n - 2; ++k)
    table.bond[static_cast<std::size_t>(k - 1)] = config.at(k) != config.at(k + 1) ? n2 : 0.0;
  const double e1 = config.at(1);
  const double el = config.at(n - 1);
  table.left_flip = (n / params.cap_a) * (params.alpha * (1.0 - e1) + (1.0 - params.alpha) * e1);
  table.right_flip = (n / params.cap_b) * (params.beta * (1.0 - el) + (1.0 - params.beta) * el);
  return table;
}

RateTable wasep_rates(const LatticeConfiguration& config, const ReservoirParams& params,
                      const TiltField& field, double t) {
  const int n = config.n_scale();
  const double n2 = static_cast<double>(n) * n;
  RateTable table;
  table.bond.resize(static_cast<std::size_t>(n - 2));
  double h_prev = field.value(t, 1.0 / n);
  const double h_left = h_prev;
  for (int k = 1; k <= n - 2; ++k) {
    const double h_next = field.value(t, static_cast<double>(k + 1) / n);
    const int d = config.at(k + 1) - config.at(k);
    table.bond[static_cast<std::size_t>(k - 1)] = d != 0 ? n2 * std::exp(-d * (h_next - h_prev)) : 0.0;
    h_prev = h_next;
  }
  const double h_right = field.value(t, static_cast<double>(n - 1) / n);
  const double e1 = config.at(1);
  const double el = config.at(n - 1);
  table.left_flip = (n / params.cap_a) * (std::exp(h_left) * params.alpha * (1.0 - e1) +
                                          std::exp(-h_left) * (1.0 - params.alpha) * e1);
  table.right_flip = (n / params.cap_b) * (std::exp(h_right) * params.beta * (1.0 - el) +
                                           std::exp(-h_right) * (1.0 - params.beta) * el);
  return table;
}

}  // namespace robin_sep
