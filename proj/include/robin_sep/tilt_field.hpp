#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace robin_sep {

/// External space-time field H(t, x) on [0, T] x [0, 1] driving the weakly
/// asymmetric dynamics. Implementations report sup-norm bounds that must
/// dominate |H| and |dH/dx| everywhere; the simulator uses them to build
/// its dominating rates.
class TiltField {
 public:
  virtual ~TiltField() = default;

  virtual double value(double t, double x) const = 0;
  virtual double gradient(double t, double x) const = 0;
  virtual double time_derivative(double t, double x) const = 0;

  virtual double sup_value() const = 0;
  virtual double sup_gradient() const = 0;

  /// Short identifier recorded in manifests, e.g. "sine(0.4,1)".
  virtual std::string id() const = 0;

  /// Declared time horizon, if the field only exists on a bounded window.
  virtual std::optional<double> horizon() const { return std::nullopt; }

  /// Times where the field is not smooth in t (quadrature splits there).
  virtual std::vector<double> time_breakpoints() const { return {}; }

  virtual bool is_zero() const { return false; }
  virtual bool time_independent() const { return false; }

  /// Separable fields satisfy H(t, x) = time_factor(t) * spatial(x).
  virtual bool separable() const { return false; }
  virtual double time_factor(double /*t*/) const { return 1.0; }
  virtual double spatial(double x) const { return value(0.0, x); }
};

using FieldPtr = std::shared_ptr<const TiltField>;

/// H = 0.
FieldPtr make_zero_field();
/// H(x) = slope * x.
FieldPtr make_affine_field(double slope);
/// H(x) = amplitude * sin(mode * pi * x).
FieldPtr make_sine_field(double amplitude, int mode);
/// H(t, x) = min(t / ramp_time, 1) * inner(x) for a time-independent inner field.
FieldPtr make_ramped_field(FieldPtr inner, double ramp_time);
/// Bilinear interpolation of a table H(t_i, x_j). The horizon is the last t_i.
FieldPtr make_tabulated_field(std::vector<double> times, std::vector<double> xs,
                              std::vector<std::vector<double>> values);
/// Reads a tabulated field from CSV with columns t,x,H (any row order,
/// tensor-product grid).
FieldPtr load_tabulated_field(const std::string& path);

/// Checks the declared bounds on the grid t_i x {k/n}: |H| <= sup_value and
/// |H(t,(k+1)/n) - H(t,k/n)| <= sup_gradient / n. Throws InvalidArgument on
/// violation.
void check_field_bounds(const TiltField& field, int n_scale, double horizon,
                        int time_samples = 64);

}  // namespace robin_sep
