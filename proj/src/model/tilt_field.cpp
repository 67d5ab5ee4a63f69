#include "robin_sep/tilt_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "robin_sep/errors.hpp"

namespace robin_sep {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class ZeroField final : public TiltField {
 public:
  double value(double, double) const override { return 0.0; }
  double gradient(double, double) const override { return 0.0; }
  double time_derivative(double, double) const override { return 0.0; }
  double sup_value() const override { return 0.0; }
  double sup_gradient() const override { return 0.0; }
  std::string id() const override { return "zero"; }
  bool is_zero() const override { return true; }
  bool time_independent() const override { return true; }
  bool separable() const override { return true; }
  double spatial(double) const override { return 0.0; }
};

class AffineField final : public TiltField {
 public:
  explicit AffineField(double slope) : slope_(slope) {}
  double value(double, double x) const override { return slope_ * x; }
  double gradient(double, double) const override { return slope_; }
  double time_derivative(double, double) const override { return 0.0; }
  double sup_value() const override { return std::abs(slope_); }
  double sup_gradient() const override { return std::abs(slope_); }
  std::string id() const override { return "affine(" + fmt(slope_) + ")"; }
  bool is_zero() const override { return slope_ == 0.0; }
  bool time_independent() const override { return true; }
  bool separable() const override { return true; }
  double spatial(double x) const override { return slope_ * x; }

 private:
  double slope_;
};

class SineField final : public TiltField {
 public:
  SineField(double amplitude, int mode) : amp_(amplitude), k_(mode * std::numbers::pi) {
    if (mode < 1) throw InvalidArgument("sine field mode must be >= 1");
    mode_ = mode;
  }
  double value(double, double x) const override { return amp_ * std::sin(k_ * x); }
  double gradient(double, double x) const override { return amp_ * k_ * std::cos(k_ * x); }
  double time_derivative(double, double) const override { return 0.0; }
  double sup_value() const override { return std::abs(amp_); }
  double sup_gradient() const override { return std::abs(amp_) * k_; }
  std::string id() const override {
    return "sine(" + fmt(amp_) + "," + std::to_string(mode_) + ")";
  }
  bool is_zero() const override { return amp_ == 0.0; }
  bool time_independent() const override { return true; }
  bool separable() const override { return true; }
  double spatial(double x) const override { return amp_ * std::sin(k_ * x); }

 private:
  double amp_;
  double k_;
  int mode_ = 1;
};

class RampedField final : public TiltField {
 public:
  RampedField(FieldPtr inner, double ramp) : inner_(std::move(inner)), ramp_(ramp) {
    if (!inner_ || !inner_->time_independent())
      throw InvalidArgument("ramped field needs a time-independent inner field");
    if (!(ramp > 0.0)) throw InvalidArgument("ramp time must be positive");
  }
  double factor(double t) const { return std::clamp(t / ramp_, 0.0, 1.0); }
  double value(double t, double x) const override { return factor(t) * inner_->value(0.0, x); }
  double gradient(double t, double x) const override {
    return factor(t) * inner_->gradient(0.0, x);
  }
  double time_derivative(double t, double x) const override {
    return (t >= 0.0 && t < ramp_) ? inner_->value(0.0, x) / ramp_ : 0.0;
  }
  double sup_value() const override { return inner_->sup_value(); }
  double sup_gradient() const override { return inner_->sup_gradient(); }
  std::string id() const override { return "ramp(" + inner_->id() + "," + fmt(ramp_) + ")"; }
  std::vector<double> time_breakpoints() const override { return {ramp_}; }
  bool is_zero() const override { return inner_->is_zero(); }
  bool separable() const override { return true; }
  double time_factor(double t) const override { return factor(t); }
  double spatial(double x) const override { return inner_->value(0.0, x); }

 private:
  FieldPtr inner_;
  double ramp_;
};

class TabulatedField final : public TiltField {
 public:
  TabulatedField(std::vector<double> times, std::vector<double> xs,
                 std::vector<std::vector<double>> values)
      : t_(std::move(times)), x_(std::move(xs)), h_(std::move(values)) {
    if (t_.size() < 2 || x_.size() < 2) throw InvalidArgument("tabulated field needs a 2x2 grid");
    if (h_.size() != t_.size()) throw InvalidArgument("tabulated field: row count mismatch");
    for (const auto& r : h_)
      if (r.size() != x_.size()) throw InvalidArgument("tabulated field: column count mismatch");
    if (!std::is_sorted(t_.begin(), t_.end()) || !std::is_sorted(x_.begin(), x_.end()))
      throw InvalidArgument("tabulated field: grid must be increasing");
    if (x_.front() > 0.0 || x_.back() < 1.0)
      throw InvalidArgument("tabulated field must cover x in [0, 1]");
    for (std::size_t i = 0; i < t_.size(); ++i)
      for (std::size_t j = 0; j < x_.size(); ++j) {
        sup_h_ = std::max(sup_h_, std::abs(h_[i][j]));
        if (j + 1 < x_.size())
          sup_g_ = std::max(sup_g_, std::abs(h_[i][j + 1] - h_[i][j]) / (x_[j + 1] - x_[j]));
      }
  }
  double value(double t, double x) const override {
    auto [i, wt] = locate(t_, t);
    auto [j, wx] = locate(x_, x);
    const double a = (1 - wx) * h_[i][j] + wx * h_[i][j + 1];
    const double b = (1 - wx) * h_[i + 1][j] + wx * h_[i + 1][j + 1];
    return (1 - wt) * a + wt * b;
  }
  double gradient(double t, double x) const override {
    auto [i, wt] = locate(t_, t);
    auto [j, wx] = locate(x_, x);
    const double dx = x_[j + 1] - x_[j];
    const double a = (h_[i][j + 1] - h_[i][j]) / dx;
    const double b = (h_[i + 1][j + 1] - h_[i + 1][j]) / dx;
    return (1 - wt) * a + wt * b;
  }
  double time_derivative(double t, double x) const override {
    auto [i, wt] = locate(t_, t);
    auto [j, wx] = locate(x_, x);
    const double dt = t_[i + 1] - t_[i];
    return ((1 - wx) * (h_[i + 1][j] - h_[i][j]) + wx * (h_[i + 1][j + 1] - h_[i][j + 1])) / dt;
  }
  double sup_value() const override { return sup_h_; }
  double sup_gradient() const override { return sup_g_; }
  std::string id() const override {
    return "tabulated(" + std::to_string(t_.size()) + "x" + std::to_string(x_.size()) + ")";
  }
  std::optional<double> horizon() const override { return t_.back(); }
  std::vector<double> time_breakpoints() const override { return t_; }

 private:
  static std::pair<std::size_t, double> locate(const std::vector<double>& g, double v) {
    v = std::clamp(v, g.front(), g.back());
    auto it = std::upper_bound(g.begin(), g.end(), v);
    std::size_t i = static_cast<std::size_t>(std::distance(g.begin(), it));
    i = std::clamp<std::size_t>(i, 1, g.size() - 1) - 1;
    return {i, (v - g[i]) / (g[i + 1] - g[i])};
  }
  std::vector<double> t_, x_;
  std::vector<std::vector<double>> h_;
  double sup_h_ = 0.0;
  double sup_g_ = 0.0;
};

}  // namespace

FieldPtr make_zero_field() { return std::make_shared<ZeroField>(); }
FieldPtr make_affine_field(double slope) { return std::make_shared<AffineField>(slope); }
FieldPtr make_sine_field(double amplitude, int mode) {
  return std::make_shared<SineField>(amplitude, mode);
}
FieldPtr make_ramped_field(FieldPtr inner, double ramp_time) {
  return std::make_shared<RampedField>(std::move(inner), ramp_time);
}
FieldPtr make_tabulated_field(std::vector<double> times, std::vector<double> xs,
                              std::vector<std::vector<double>> values) {
  return std::make_shared<TabulatedField>(std::move(times), std::move(xs), std::move(values));
}

FieldPtr load_tabulated_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open field table " + path);
  std::string line;
  std::map<std::pair<double, double>, double> table;
  std::vector<double> ts, xs;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find_first_of("tTxH") != std::string::npos &&
          line.find_first_of("0123456789") == std::string::npos)
        continue;
    }
    std::istringstream ls(line);
    double t, x, h;
    char c1, c2;
    if (!(ls >> t >> c1 >> x >> c2 >> h) || c1 != ',' || c2 != ',')
      throw InvalidArgument("malformed field table row: " + line);
    table[{t, x}] = h;
    ts.push_back(t);
    xs.push_back(x);
  }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(ts);
  uniq(xs);
  std::vector<std::vector<double>> values(ts.size(), std::vector<double>(xs.size()));
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      auto it = table.find({ts[i], xs[j]});
      if (it == table.end()) throw InvalidArgument("field table is not a tensor grid");
      values[i][j] = it->second;
    }
  return make_tabulated_field(std::move(ts), std::move(xs), std::move(values));
}

void check_field_bounds(const TiltField& field, int n_scale, double horizon, int time_samples) {
  if (auto h = field.horizon(); h && horizon > *h * (1.0 + 1e-12))
    throw InvalidArgument("simulation horizon exceeds the field's horizon");
  const double sv = field.sup_value() * (1.0 + 1e-12) + 1e-300;
  const double sg = field.sup_gradient() * (1.0 + 1e-12) + 1e-300;
  for (int i = 0; i <= time_samples; ++i) {
    const double t = horizon * i / time_samples;
    double prev = field.value(t, 0.0);
    if (std::abs(prev) > sv) throw InvalidArgument("field exceeds its declared sup bound");
    for (int k = 1; k <= n_scale; ++k) {
      const double v = field.value(t, static_cast<double>(k) / n_scale);
      if (!std::isfinite(v) || std::abs(v) > sv)
        throw InvalidArgument("field exceeds its declared sup bound");
      if (std::abs(v - prev) * n_scale > sg)
        throw InvalidArgument("field increments exceed its declared gradient bound");
      prev = v;
    }
  }
}

}  // namespace robin_sep
