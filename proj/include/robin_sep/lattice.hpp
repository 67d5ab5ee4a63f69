#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robin_sep/params.hpp"
#include "robin_sep/rng.hpp"

namespace robin_sep {

/// Occupation state of the N - 1 sites k/N, k = 1..N-1, stored as packed bits.
class LatticeConfiguration {
 public:
  /// Empty configuration at scale n_scale (>= 3).
  explicit LatticeConfiguration(int n_scale);
  /// From explicit occupancies (length n_scale - 1, entries 0/1).
  LatticeConfiguration(int n_scale, const std::vector<int>& occupancy);

  int n_scale() const { return n_; }
  int sites() const { return n_ - 1; }

  /// Occupation of site k, 1 <= k <= N-1.
  int at(int k) const {
    const auto i = static_cast<std::size_t>(k - 1);
    return static_cast<int>((bits_[i >> 6] >> (i & 63)) & 1u);
  }
  void flip(int k) {
    const auto i = static_cast<std::size_t>(k - 1);
    bits_[i >> 6] ^= (std::uint64_t{1} << (i & 63));
  }
  void exchange(int k) {
    if (at(k) != at(k + 1)) {
      flip(k);
      flip(k + 1);
    }
  }

  int particle_count() const;
  std::vector<int> occupancy() const;

  bool operator==(const LatticeConfiguration&) const = default;

 private:
  int n_;
  std::vector<std::uint64_t> bits_;
};

/// Independent Bernoulli(gamma(k/N)) occupancies.
LatticeConfiguration sample_profile(const std::function<double(double)>& gamma,
                                    int n_scale, CounterRng& rng);
LatticeConfiguration sample_profile(const std::function<double(double)>& gamma,
                                    int n_scale, std::uint64_t seed);

/// Empirical measure: atoms of mass 1/N at the occupied sites.
struct EmpiricalMeasure {
  int n_scale = 0;
  std::vector<double> positions;

  static EmpiricalMeasure of(const LatticeConfiguration& config);
  double total_mass() const {
    return static_cast<double>(positions.size()) / static_cast<double>(n_scale);
  }
};

/// Smoothing kernel phi^eps(r) = phi(r/eps)/eps with the normalised bump
/// phi(r) = exp(-1/(1-r^2))/Z on |r| < 1.
class Mollifier {
 public:
  explicit Mollifier(double epsilon);
  double epsilon() const { return eps_; }
  double operator()(double r) const;
  /// Z, computed once by adaptive quadrature and cached.
  static double normalizer();

 private:
  double eps_;
};

/// Default normaliser U_eps = 1 + eps.
inline double default_u_eps(double epsilon) { return 1.0 + epsilon; }

/// Smoothed density x -> U_eps^{-1} sum_atoms (1/N) phi^eps(y - x) at the
/// requested points. Throws InvalidArgument unless eps > 0 and u_eps > 1.
std::vector<double> empirical_density(const EmpiricalMeasure& measure, double epsilon,
                                      double u_eps, const std::vector<double>& xs);

/// Same smoothing applied to a density given on a uniform unit grid:
/// U_eps^{-1} int_0^1 phi^eps(y - x) u(y) dy.
std::vector<double> smooth_grid_density(const std::vector<double>& grid_values,
                                        double epsilon, double u_eps,
                                        const std::vector<double>& xs);

/// CSV with columns site,occupancy.
std::string measure_csv(const EmpiricalMeasure& measure);

}  // namespace robin_sep
