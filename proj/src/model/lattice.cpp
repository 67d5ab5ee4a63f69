#include "robin_sep/lattice.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "robin_sep/errors.hpp"
#include "robin_sep/numerics.hpp"

namespace robin_sep {

LatticeConfiguration::LatticeConfiguration(int n_scale)
    : n_(n_scale), bits_((static_cast<std::size_t>(std::max(n_scale, 3)) + 62) / 64, 0) {
  if (n_scale < 3) throw InvalidArgument("n_scale must be >= 3");
}

LatticeConfiguration::LatticeConfiguration(int n_scale, const std::vector<int>& occupancy)
    : LatticeConfiguration(n_scale) {
  if (occupancy.size() != static_cast<std::size_t>(n_scale - 1))
    throw InvalidArgument("occupancy length must be n_scale - 1");
  for (std::size_t i = 0; i < occupancy.size(); ++i) {
    if (occupancy[i] != 0 && occupancy[i] != 1)
      throw InvalidArgument("occupancy entries must be 0 or 1");
    if (occupancy[i]) flip(static_cast<int>(i) + 1);
  }
}

int LatticeConfiguration::particle_count() const {
  int c = 0;
  for (auto w : bits_) c += std::popcount(w);
  return c;
}

std::vector<int> LatticeConfiguration::occupancy() const {
  std::vector<int> out(static_cast<std::size_t>(sites()));
  for (int k = 1; k <= sites(); ++k) out[static_cast<std::size_t>(k - 1)] = at(k);
  return out;
}

LatticeConfiguration sample_profile(const std::function<double(double)>& gamma, int n_scale,
                                    CounterRng& rng) {
  LatticeConfiguration config(n_scale);
  for (int k = 1; k < n_scale; ++k) {
    const double p = gamma(static_cast<double>(k) / n_scale);
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("profile values must lie in [0, 1]");
    if (rng.uniform() < p) config.flip(k);
  }
  return config;
}

LatticeConfiguration sample_profile(const std::function<double(double)>& gamma, int n_scale,
                                    std::uint64_t seed) {
  CounterRng rng(seed, stream_id(0, StreamPurpose::initial_config));
  return sample_profile(gamma, n_scale, rng);
}

EmpiricalMeasure EmpiricalMeasure::of(const LatticeConfiguration& config) {
  EmpiricalMeasure m;
  m.n_scale = config.n_scale();
  for (int k = 1; k <= config.sites(); ++k)
    if (config.at(k)) m.positions.push_back(static_cast<double>(k) / config.n_scale());
  return m;
}

namespace {
double bump(double r) { return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }
}  // namespace

Mollifier::Mollifier(double epsilon) : eps_(epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
}

double Mollifier::normalizer() {
  static const double z = [] {
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate([](double r) { return bump(r); }, -1.0, 1.0, 1e-13);
  }();
  return z;
}

double Mollifier::operator()(double r) const { return bump(r / eps_) / (normalizer() * eps_); }

std::vector<double> empirical_density(const EmpiricalMeasure& measure, double epsilon,
                                      double u_eps, const std::vector<double>& xs) {
  if (!(u_eps > 1.0)) throw InvalidArgument("u_eps must exceed 1");
  const Mollifier phi(epsilon);
  const double n = measure.n_scale;
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    // Atoms are sorted; only those within epsilon contribute.
    auto lo = std::lower_bound(measure.positions.begin(), measure.positions.end(), x - epsilon);
    double s = 0.0;
    for (auto it = lo; it != measure.positions.end() && *it < x + epsilon; ++it) s += phi(*it - x);
    out[i] = s / (n * u_eps);
  }
  return out;
}

std::vector<double> smooth_grid_density(const std::vector<double>& grid_values, double epsilon,
                                        double u_eps, const std::vector<double>& xs) {
  if (!(u_eps > 1.0)) throw InvalidArgument("u_eps must exceed 1");
  const Mollifier phi(epsilon);
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double a = std::max(0.0, x - epsilon);
    const double b = std::min(1.0, x + epsilon);
    double s = 0.0;
    if (b > a) {
      s = gauss_legendre(
          [&](double y) { return phi(y - x) * interpolate_unit_grid(grid_values, y); }, a, b, 32);
    }
    out[i] = s / u_eps;
  }
  return out;
}

std::string measure_csv(const EmpiricalMeasure& measure) {
  std::ostringstream os;
  os << "site,occupancy\n";
  std::size_t next = 0;
  for (int k = 1; k < measure.n_scale; ++k) {
    const double x = static_cast<double>(k) / measure.n_scale;
    int occ = 0;
    if (next < measure.positions.size() && std::abs(measure.positions[next] - x) < 0.5 / measure.n_scale) {
      occ = 1;
      ++next;
    }
    os << k << ',' << occ << '\n';
  }
  return os.str();
}

}  // namespace robin_sep
