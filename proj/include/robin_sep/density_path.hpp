#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "robin_sep/params.hpp"

namespace robin_sep {

/// Density u(t_i, x_j) on a time grid 0 = t_0 < ... < t_L = T and the uniform
/// space grid x_j = j/M. Values are stored row-major by time.
class DensityPath {
 public:
  DensityPath() = default;
  DensityPath(std::vector<double> times, std::size_t intervals);

  std::size_t time_nodes() const { return times_.size(); }
  std::size_t space_nodes() const { return m_ + 1; }
  std::size_t intervals() const { return m_; }
  double dx() const { return 1.0 / static_cast<double>(m_); }
  const std::vector<double>& times() const { return times_; }
  double horizon() const { return times_.back() - times_.front(); }

  double& at(std::size_t i, std::size_t j) { return values_[i * (m_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return values_[i * (m_ + 1) + j]; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * (m_ + 1), m_ + 1}; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * (m_ + 1), m_ + 1};
  }
  std::vector<double> slice(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }
  const std::vector<double>& data() const { return values_; }

  double trace_left(std::size_t i) const { return at(i, 0); }
  double trace_right(std::size_t i) const { return at(i, m_); }

  /// Space gradient of slice i (second order, one-sided at the ends).
  std::vector<double> space_gradient(std::size_t i) const;
  /// Time derivative at node i: centered inside, second-order one-sided at
  /// the endpoints; non-uniform time grids are handled.
  std::vector<double> time_derivative(std::size_t i) const;

  /// Linear interpolation in time of the slice at t.
  std::vector<double> slice_at(double t) const;
  /// Restriction to time nodes first..last (absolute times kept).
  DensityPath window(std::size_t first, std::size_t last) const;

  double min_value() const;
  double max_value() const;

  /// CSV with columns t,x,u (17 significant digits).
  std::string to_csv() const;
  /// Binary dump: one JSON header line then little-endian doubles
  /// (times, then values).
  void write_binary(const std::string& path, const std::string& scheme,
                    const ReservoirParams& params) const;
  static DensityPath read_binary(const std::string& path);

  bool operator==(const DensityPath&) const = default;

 private:
  std::vector<double> times_;
  std::size_t m_ = 0;
  std::vector<double> values_;
};

}  // namespace robin_sep
