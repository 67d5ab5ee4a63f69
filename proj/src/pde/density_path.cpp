#include "robin_sep/density_path.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "robin_sep/errors.hpp"
#include "robin_sep/numerics.hpp"

namespace robin_sep {

DensityPath::DensityPath(std::vector<double> times, std::size_t intervals)
    : times_(std::move(times)), m_(intervals) {
  if (times_.empty()) throw InvalidArgument("density path needs at least one time node");
  if (intervals < 2) throw InvalidArgument("density path needs at least two space intervals");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw InvalidArgument("time grid must increase");
  values_.assign(times_.size() * (m_ + 1), 0.0);
}

std::vector<double> DensityPath::space_gradient(std::size_t i) const {
  return gradient(row(i), dx());
}

std::vector<double> DensityPath::time_derivative(std::size_t i) const {
  const std::size_t n = space_nodes();
  const std::size_t l = time_nodes();
  std::vector<double> d(n, 0.0);
  if (l < 2) return d;
  if (l == 2) {
    const double h = times_[1] - times_[0];
    for (std::size_t j = 0; j < n; ++j) d[j] = (at(1, j) - at(0, j)) / h;
    return d;
  }
  std::size_t a, b, c;
  double ca, cb, cc;
  if (i == 0 || i + 1 == l) {
    const bool left = i == 0;
    a = left ? 0 : l - 1;
    b = left ? 1 : l - 2;
    c = left ? 2 : l - 3;
    const double h1 = std::abs(times_[b] - times_[a]);
    const double h2 = std::abs(times_[c] - times_[b]);
    const double sgn = left ? 1.0 : -1.0;
    ca = -sgn * (2 * h1 + h2) / (h1 * (h1 + h2));
    cb = sgn * (h1 + h2) / (h1 * h2);
    cc = -sgn * h1 / (h2 * (h1 + h2));
  } else {
    a = i - 1;
    b = i;
    c = i + 1;
    const double h1 = times_[i] - times_[i - 1];
    const double h2 = times_[i + 1] - times_[i];
    ca = -h2 / (h1 * (h1 + h2));
    cb = (h2 - h1) / (h1 * h2);
    cc = h1 / (h2 * (h1 + h2));
  }
  for (std::size_t j = 0; j < n; ++j) d[j] = ca * at(a, j) + cb * at(b, j) + cc * at(c, j);
  return d;
}

std::vector<double> DensityPath::slice_at(double t) const {
  if (times_.size() == 1 || t <= times_.front()) return slice(0);
  if (t >= times_.back()) return slice(times_.size() - 1);
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  std::vector<double> out(space_nodes());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1 - w) * at(i, j) + w * at(i + 1, j);
  return out;
}

DensityPath DensityPath::window(std::size_t first, std::size_t last) const {
  if (!(first <= last && last < time_nodes())) throw InvalidArgument("invalid time window");
  DensityPath out(std::vector<double>(times_.begin() + static_cast<std::ptrdiff_t>(first),
                                      times_.begin() + static_cast<std::ptrdiff_t>(last) + 1),
                  m_);
  std::copy(values_.begin() + static_cast<std::ptrdiff_t>(first * (m_ + 1)),
            values_.begin() + static_cast<std::ptrdiff_t>((last + 1) * (m_ + 1)), out.values_.begin());
  return out;
}

double DensityPath::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double DensityPath::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

std::string DensityPath::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "t,x,u\n";
  for (std::size_t i = 0; i < time_nodes(); ++i)
    for (std::size_t j = 0; j <= m_; ++j)
      os << times_[i] << ',' << static_cast<double>(j) * dx() << ',' << at(i, j) << '\n';
  return os.str();
}

namespace {
static_assert(std::endian::native == std::endian::little, "binary dumps assume little-endian hosts");
}

void DensityPath::write_binary(const std::string& path, const std::string& scheme,
                               const ReservoirParams& params) const {
  nlohmann::ordered_json header;
  header["format"] = "robin-sep-density";
  header["version"] = 1;
  header["time_nodes"] = time_nodes();
  header["space_intervals"] = m_;
  header["scheme"] = scheme;
  header["params"] = {{"alpha", params.alpha}, {"beta", params.beta}, {"A", params.cap_a}, {"B", params.cap_b}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(times_.data()),
            static_cast<std::streamsize>(times_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
}

DensityPath DensityPath::read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "robin-sep-density")
    throw InvalidArgument("not a density dump: " + path);
  const auto l = header.at("time_nodes").get<std::size_t>();
  const auto m = header.at("space_intervals").get<std::size_t>();
  std::vector<double> times(l);
  in.read(reinterpret_cast<char*>(times.data()), static_cast<std::streamsize>(l * sizeof(double)));
  DensityPath p(std::move(times), m);
  in.read(reinterpret_cast<char*>(p.values_.data()),
          static_cast<std::streamsize>(p.values_.size() * sizeof(double)));
  if (!in) throw InvalidArgument("truncated density dump: " + path);
  return p;
}

}  // namespace robin_sep
