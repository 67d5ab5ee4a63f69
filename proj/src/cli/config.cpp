#include "robin_sep/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "robin_sep/errors.hpp"

namespace robin_sep {

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + message : message),
      line_(line),
      column_(column) {}

namespace {

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s{
      {"params", {"alpha", "beta", "A", "B"}},
      {"grid", {"space_intervals", "time_steps", "modes", "time_hats", "cosine_modes"}},
      {"run",
       {"scenario", "horizon", "seed", "replicas", "n_scale", "scales", "epsilon", "gamma", "ball_radius", "jobs"}},
      {"field", {"kind", "slope", "amplitude", "mode", "ramp", "path"}},
      {"proposal", {"kind", "slope", "amplitude", "mode", "ramp", "path"}},
      {"output", {"dir", "figures"}},
  };
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
  int column = 0;
};

using Table = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& section, const std::string& key) {
  const auto it = schema().find(section);
  if (it == schema().end()) return false;
  return std::find(it->second.begin(), it->second.end(), key) != it->second.end();
}

Table parse_text(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const int col = static_cast<int>(first) + 1;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) throw ConfigError("unterminated section header", line_no, col);
      if (!trim(line.substr(close + 1)).empty())
        throw ConfigError("unexpected text after section header", line_no, static_cast<int>(close) + 2);
      section = trim(line.substr(first + 1, close - first - 1));
      if (!schema().count(section)) throw ConfigError("unknown section [" + section + "]", line_no, col + 1);
      if (table.count(section)) throw ConfigError("duplicate section [" + section + "]", line_no, col);
      table[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no, col);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", line_no, col);
    if (section.empty()) throw ConfigError("key '" + key + "' outside of any section", line_no, col);
    if (!known_key(section, key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no, col);
    if (table[section].count(key)) throw ConfigError("duplicate key '" + key + "'", line_no, col);
    const auto vpos = line.find_first_not_of(" \t", eq + 1);
    const int vcol = static_cast<int>(vpos == std::string::npos ? eq + 1 : vpos) + 1;
    table[section][key] = Entry{trim(line.substr(eq + 1)), line_no, vcol};
  }
  return table;
}

void apply_override(Table& table, const std::string& raw) {
  std::string text = raw;
  while (!text.empty() && text.front() == '-') text.erase(text.begin());
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + raw + "' is not of the form key=value");
  std::string key = trim(text.substr(0, eq));
  const std::string value = trim(text.substr(eq + 1));
  std::string section;
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
    if (!known_key(section, key)) throw ConfigError("unknown override key '" + raw + "'");
  } else {
    std::vector<std::string> owners;
    for (const auto& [name, keys] : schema())
      if (std::find(keys.begin(), keys.end(), key) != keys.end()) owners.push_back(name);
    if (owners.empty()) throw ConfigError("unknown override key '" + key + "'");
    if (owners.size() > 1) throw ConfigError("override key '" + key + "' is ambiguous; qualify it as section.key");
    section = owners.front();
  }
  table[section][key] = Entry{value, 0, 0};
}

class Reader {
 public:
  explicit Reader(const Table& t) : table_(t) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto s = table_.find(section);
    if (s == table_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  double number(const std::string& section, const std::string& key, std::optional<double> fallback) const {
    const Entry* e = find(section, key);
    if (!e) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key '" + key + "' in [" + section + "]");
    }
    double v = 0.0;
    const char* b = e->value.data();
    const char* end = b + e->value.size();
    const auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
      throw ConfigError("'" + key + "' expects a finite number, got '" + e->value + "'", e->line, e->column);
    return v;
  }

  long long integer(const std::string& section, const std::string& key, long long fallback, long long lo,
                    long long hi) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    long long v = 0;
    const char* b = e->value.data();
    const char* end = b + e->value.size();
    const auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end)
      throw ConfigError("'" + key + "' expects an integer, got '" + e->value + "'", e->line, e->column);
    if (v < lo || v > hi)
      throw ConfigError("'" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]",
                        e->line, e->column);
    return v;
  }

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ConfigError("'" + key + "' expects true or false", e->line, e->column);
  }

  void require(bool ok, const std::string& section, const std::string& key, const std::string& message) const {
    if (ok) return;
    const Entry* e = find(section, key);
    throw ConfigError(message, e ? e->line : 0, e ? e->column : 0);
  }

 private:
  const Table& table_;
};

FieldSpec read_field(const Reader& r, const std::string& section, const std::filesystem::path& base) {
  FieldSpec f;
  f.kind = r.text(section, "kind", "zero");
  r.require(f.kind == "zero" || f.kind == "affine" || f.kind == "sine" || f.kind == "tabulated", section, "kind",
            "field kind must be one of zero, affine, sine, tabulated");
  f.slope = r.number(section, "slope", 0.0);
  f.amplitude = r.number(section, "amplitude", 0.0);
  f.mode = static_cast<int>(r.integer(section, "mode", 1, 1, 1000));
  f.ramp = r.number(section, "ramp", 0.0);
  r.require(f.ramp >= 0.0, section, "ramp", "ramp must be non-negative");
  f.path = r.text(section, "path", "");
  if (f.kind == "tabulated") {
    r.require(!f.path.empty(), section, "kind", "tabulated field requires 'path'");
    std::filesystem::path p(f.path);
    if (p.is_relative() && !std::filesystem::exists(p) && std::filesystem::exists(base / p)) p = base / p;
    r.require(std::filesystem::exists(p), section, "path", "field file '" + f.path + "' does not exist");
    f.path = p.string();
  }
  return f;
}

bool valid_gamma(const std::string& g) {
  if (g == "stationary" || g == "step") return true;
  for (const std::string prefix : {"const:", "sine:"}) {
    if (g.rfind(prefix, 0) != 0) continue;
    const std::string rest = g.substr(prefix.size());
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) return false;
    return prefix == "const:" ? (v >= 0.0 && v <= 1.0) : (std::abs(v) <= 0.5);
  }
  return false;
}

std::vector<int> parse_scales(const Reader& r) {
  const Entry* e = r.find("run", "scales");
  if (!e) return {64, 128, 256};
  std::vector<int> out;
  std::stringstream ss(e->value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v < 4)
      throw ConfigError("'scales' expects a comma-separated list of integers >= 4", e->line, e->column);
    if (!out.empty() && v <= out.back())
      throw ConfigError("'scales' must be strictly increasing", e->line, e->column);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("'scales' is empty", e->line, e->column);
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "simulate") return Scenario::simulate;
  if (n == "hydro") return Scenario::hydro;
  if (n == "controlled") return Scenario::controlled;
  if (n == "spectral") return Scenario::spectral;
  if (n == "rate") return Scenario::rate;
  if (n == "hydro-limit") return Scenario::hydro_limit;
  if (n == "entropy") return Scenario::entropy;
  if (n == "rare-event") return Scenario::rare_event;
  throw ConfigError("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::simulate: return "simulate";
    case Scenario::hydro: return "hydro";
    case Scenario::controlled: return "controlled";
    case Scenario::spectral: return "spectral";
    case Scenario::rate: return "rate";
    case Scenario::hydro_limit: return "hydro-limit";
    case Scenario::entropy: return "entropy";
    case Scenario::rare_event: return "rare-event";
  }
  return "unknown";
}

FieldPtr FieldSpec::build() const {
  FieldPtr f;
  if (kind == "zero") return make_zero_field();
  if (kind == "affine") f = make_affine_field(slope);
  else if (kind == "sine") f = make_sine_field(amplitude, mode);
  else if (kind == "tabulated") return load_tabulated_field(path);
  else throw ConfigError("unknown field kind '" + kind + "'");
  return ramp > 0.0 ? make_ramped_field(f, ramp) : f;
}

std::string FieldSpec::describe() const { return build()->id(); }

Profile RunConfig::initial_profile() const {
  if (gamma == "stationary") {
    const auto s = stationary_profile(params);
    return [s](double x) { return s.intercept + s.slope * x; };
  }
  if (gamma == "step") return [](double x) { return x < 0.5 ? 1.0 : 0.0; };
  if (gamma.rfind("const:", 0) == 0) {
    const double v = std::stod(gamma.substr(6));
    return [v](double) { return v; };
  }
  if (gamma.rfind("sine:", 0) == 0) {
    const double a = std::stod(gamma.substr(5));
    return [a](double x) { return 0.5 + a * std::sin(M_PI * x); };
  }
  throw ConfigError("unknown initial profile '" + gamma + "'");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "[params]\nalpha = " << params.alpha << "\nbeta = " << params.beta << "\nA = " << params.cap_a
     << "\nB = " << params.cap_b << "\n\n[grid]\nspace_intervals = " << space_intervals
     << "\ntime_steps = " << time_steps << "\nmodes = " << modes << "\ntime_hats = " << time_hats
     << "\ncosine_modes = " << cosine_modes << "\n\n[run]\nscenario = " << scenario_name(scenario)
     << "\nhorizon = " << horizon << "\nseed = " << seed << "\nreplicas = " << replicas
     << "\nn_scale = " << n_scale << "\nscales = ";
  for (std::size_t i = 0; i < scales.size(); ++i) os << (i ? "," : "") << scales[i];
  os << "\nepsilon = " << epsilon << "\ngamma = " << gamma << "\nball_radius = " << ball_radius
     << "\njobs = " << jobs << "\n";
  auto field_block = [&](const char* name, const FieldSpec& f) {
    os << "\n[" << name << "]\nkind = " << f.kind << "\nslope = " << f.slope << "\namplitude = " << f.amplitude
       << "\nmode = " << f.mode << "\nramp = " << f.ramp << "\n";
    if (!f.path.empty()) os << "path = " << f.path << "\n";
  };
  field_block("field", field);
  if (proposal) field_block("proposal", *proposal);
  os << "\n[output]\ndir = " << output_dir << "\nfigures = " << (figures ? "true" : "false") << "\n";
  return os.str();
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::string& source) {
  Table table = parse_text(text);
  for (const auto& o : overrides) apply_override(table, o);
  const Reader r(table);
  const std::filesystem::path base = std::filesystem::path(source).parent_path();

  RunConfig c;
  c.scenario = parse_scenario(r.text("run", "scenario", "hydro"));
  c.params.alpha = r.number("params", "alpha", std::nullopt);
  c.params.beta = r.number("params", "beta", std::nullopt);
  c.params.cap_a = r.number("params", "A", 1.0);
  c.params.cap_b = r.number("params", "B", 1.0);
  r.require(c.params.alpha > 0.0 && c.params.alpha < 1.0, "params", "alpha", "alpha must satisfy 0 < alpha < 1");
  r.require(c.params.beta > 0.0 && c.params.beta < 1.0, "params", "beta", "beta must satisfy 0 < beta < 1");
  r.require(c.params.alpha <= c.params.beta, "params", "alpha",
            "invariant alpha <= beta violated (alpha = " + r.text("params", "alpha", "") +
                ", beta = " + r.text("params", "beta", "") + ")");
  r.require(c.params.cap_a > 0.0, "params", "A", "A must be positive");
  r.require(c.params.cap_b > 0.0, "params", "B", "B must be positive");

  c.space_intervals = static_cast<std::size_t>(r.integer("grid", "space_intervals", 512, 8, 1 << 16));
  c.time_steps = static_cast<std::size_t>(r.integer("grid", "time_steps", 2048, 4, 10'000'000));
  c.modes = static_cast<std::size_t>(r.integer("grid", "modes", 128, 1, 4096));
  c.time_hats = static_cast<std::size_t>(r.integer("grid", "time_hats", 33, 3, 1025));
  c.cosine_modes = static_cast<std::size_t>(r.integer("grid", "cosine_modes", 12, 0, 256));

  c.horizon = r.number("run", "horizon", 0.2);
  r.require(c.horizon > 0.0 && c.horizon <= 1e3, "run", "horizon", "horizon must lie in (0, 1000]");
  c.seed = static_cast<std::uint64_t>(r.integer("run", "seed", 1, 0, std::numeric_limits<long long>::max()));
  c.replicas = static_cast<std::size_t>(r.integer("run", "replicas", 20, 2, 1'000'000));
  c.n_scale = static_cast<int>(r.integer("run", "n_scale", 64, 4, 1 << 20));
  c.scales = parse_scales(r);
  c.epsilon = r.number("run", "epsilon", 0.05);
  r.require(c.epsilon > 0.0 && c.epsilon < 0.5, "run", "epsilon", "epsilon must lie in (0, 0.5)");
  c.gamma = r.text("run", "gamma", "stationary");
  r.require(valid_gamma(c.gamma), "run", "gamma",
            "gamma must be stationary, step, const:<v in [0,1]> or sine:<|a| <= 0.5>");
  c.ball_radius = r.number("run", "ball_radius", 0.05);
  r.require(c.ball_radius > 0.0, "run", "ball_radius", "ball_radius must be positive");
  c.jobs = static_cast<unsigned>(r.integer("run", "jobs", 1, 1, 1024));

  c.field = read_field(r, "field", base);
  if (table.count("proposal")) c.proposal = read_field(r, "proposal", base);

  c.output_dir = r.text("output", "dir", "");
  c.figures = r.boolean("output", "figures", true);
  return c;
}

RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, path);
}

}  // namespace robin_sep
