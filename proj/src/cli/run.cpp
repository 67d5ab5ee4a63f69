#include "robin_sep/run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "robin_sep/errors.hpp"
#include "robin_sep/experiments.hpp"
#include "robin_sep/lattice.hpp"
#include "robin_sep/rate.hpp"
#include "robin_sep/simulator.hpp"
#include "robin_sep/spectral.hpp"

namespace robin_sep {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, bool log_y) {
  constexpr double width = 640, height = 420, left = 70, right = 160, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if (!std::isfinite(s.ys[i]) || (log_y && s.ys[i] <= 0.0)) continue;
      x0 = std::min(x0, s.xs[i]);
      x1 = std::max(x1, s.xs[i]);
      y0 = std::min(y0, ty(s.ys[i]));
      y1 = std::max(y1, ty(s.ys[i]));
    }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x1 = x0 + 1;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double sx = left + pw * k / 4.0;
    const double sy = top + ph * (1.0 - k / 4.0);
    os << "<line x1=\"" << sx << "\" y1=\"" << top + ph << "\" x2=\"" << sx << "\" y2=\"" << top + ph + 5
       << "\" stroke=\"black\"/>\n<text x=\"" << sx << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << fx << "</text>\n";
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << sy << "\" x2=\"" << left << "\" y2=\"" << sy
       << "\" stroke=\"black\"/>\n<text x=\"" << left - 8 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
       << (log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
     << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 7];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].xs.size() && i < series[s].ys.size(); ++i) {
      if (!std::isfinite(series[s].ys[i]) || (log_y && series[s].ys[i] <= 0.0)) continue;
      os << px(series[s].xs[i]) << ',' << py(series[s].ys[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4
       << "\">" << series[s].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

class Outputs {
 public:
  Outputs(const RunConfig& config, fs::path dir) : config_(config), dir_(std::move(dir)) {
    fs::create_directories(dir_);
    write_manifest("running", {});
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + (dir_ / name).string() + "'");
    out << content;
    out.close();
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }

  void figure(const std::string& name, const std::string& title, const std::string& xl, const std::string& yl,
              const std::vector<Series>& series, bool log_y = false) {
    if (config_.figures) write(name, svg_line_chart(title, xl, yl, series, log_y));
  }

  void write_manifest(const std::string& status, const RunResult& result) {
    json m;
    m["tool"] = "robin-sep";
    m["scenario"] = scenario_name(config_.scenario);
    m["status"] = status;
    m["exit_code"] = result.exit_code;
    m["seed"] = config_.seed;
    m["params"] = {{"alpha", config_.params.alpha},
                   {"beta", config_.params.beta},
                   {"A", config_.params.cap_a},
                   {"B", config_.params.cap_b}};
    m["grid"] = {{"space_intervals", config_.space_intervals},
                 {"time_steps", config_.time_steps},
                 {"modes", config_.modes},
                 {"time_hats", config_.time_hats},
                 {"cosine_modes", config_.cosine_modes}};
    m["field"] = config_.field.kind;
    m["config"] = config_.canonical();
    json checks = json::array();
    for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    m["checks"] = checks;
    if (!result.error.empty()) m["error"] = result.error;
    json files = json::array();
    for (const auto& f : files_) files.push_back({{"path", f}, {"sha256", sha256_file((dir_ / f).string())}});
    m["files"] = files;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  const RunConfig& config_;
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void check(RunResult& r, const std::string& name, bool ok, const std::string& detail) {
  r.checks.push_back({name, ok, detail});
}

std::vector<double> unit_points(std::size_t m) {
  std::vector<double> xs(m + 1);
  for (std::size_t j = 0; j <= m; ++j) xs[j] = static_cast<double>(j) / static_cast<double>(m);
  return xs;
}

/// Snapshot table: x followed by one column per snapshot time.
void write_snapshots(Outputs& out, const DensityPath& u, double horizon, const std::string& stem,
                     const std::string& title) {
  std::vector<double> ts;
  for (int k = 0; k <= 4; ++k) ts.push_back(horizon * k / 4.0);
  std::vector<std::vector<double>> cols;
  for (double t : ts) cols.push_back(u.slice_at(t));
  const auto xs = unit_points(u.intervals());
  std::ostringstream os;
  os << std::setprecision(17) << "x";
  for (double t : ts) os << ",u_t" << t;
  os << '\n';
  for (std::size_t j = 0; j < xs.size(); ++j) {
    os << xs[j];
    for (const auto& c : cols) os << ',' << c[j];
    os << '\n';
  }
  out.write(stem + ".csv", os.str());
  std::vector<Series> series;
  for (std::size_t k = 0; k < ts.size(); ++k) series.push_back({"t=" + fmt(ts[k]).substr(0, 8), xs, cols[k]});
  out.figure(stem + ".svg", title, "x", "density", series);
}

void hydro_checks(RunResult& r, const DensityPath& u, const RunConfig& c, const Profile& gamma) {
  double lo = std::min(c.params.alpha, 1.0), hi = std::max(c.params.beta, 0.0);
  for (std::size_t j = 0; j <= u.intervals(); ++j) {
    const double g = gamma(static_cast<double>(j) / static_cast<double>(u.intervals()));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  const double slack = 1e-9;
  check(r, "maximum_principle", u.min_value() >= lo - slack && u.max_value() <= hi + slack,
        "range [" + fmt(u.min_value()) + ", " + fmt(u.max_value()) + "] within [" + fmt(lo) + ", " + fmt(hi) + "]");
}

void run_simulate(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto field = c.field.build();
  const auto gamma = c.initial_profile();
  CounterRng init(c.seed, stream_id(0, StreamPurpose::initial_config));
  const auto initial = sample_profile(gamma, c.n_scale, init);
  const auto path = simulate(initial, c.params, field, c.horizon, c.seed);
  out.write("events.csv", path.events_csv());
  out.write("path.json", path.manifest_json());

  std::vector<double> xs;
  constexpr int points = 180;
  for (int k = 0; k <= points; ++k) xs.push_back(c.epsilon + (1.0 - 2.0 * c.epsilon) * k / points);
  std::ostringstream os;
  os << std::setprecision(17) << "x";
  std::vector<Series> series;
  std::vector<std::vector<double>> cols;
  for (int k = 0; k <= 4; ++k) {
    const double t = c.horizon * k / 4.0;
    os << ",rho_t" << t;
    cols.push_back(empirical_density(EmpiricalMeasure::of(path.config_at(t)), c.epsilon, default_u_eps(c.epsilon), xs));
    series.push_back({"t=" + fmt(t).substr(0, 8), xs, cols.back()});
  }
  os << '\n';
  for (std::size_t j = 0; j < xs.size(); ++j) {
    os << xs[j];
    for (const auto& col : cols) os << ',' << col[j];
    os << '\n';
  }
  out.write("density.csv", os.str());
  out.figure("density.svg", "smoothed empirical density", "x", "density", series);

  const double recomputed = girsanov_log_weight(path, c.params, *field);
  check(r, "girsanov_replay", std::abs(recomputed - path.log_weight) <= 1e-9 * (1.0 + std::abs(path.log_weight)),
        "log_weight " + fmt(path.log_weight) + " replayed " + fmt(recomputed));
  const auto final_config = path.config_at(c.horizon);
  check(r, "occupancy_range", final_config.particle_count() >= 0 && final_config.particle_count() <= c.n_scale - 1,
        "events " + std::to_string(path.events.size()) + " final particles " +
            std::to_string(final_config.particle_count()));
}

void run_hydro(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto gamma = c.initial_profile();
  const auto u = solve_hydrodynamic(gamma, c.params, c.horizon, c.grid());
  write_snapshots(out, u, c.horizon, "density", "hydrodynamic density");
  hydro_checks(r, u, c, gamma);
  const auto defect = mass_balance_defect(u, c.params, *make_zero_field());
  double worst = 0.0;
  for (std::size_t i = 2; i < defect.size(); ++i) worst = std::max(worst, std::abs(defect[i]));
  check(r, "mass_balance", worst <= 1e-8, "max defect " + fmt(worst));
  if (u.min_value() <= 0.0 || u.max_value() >= 1.0) {
    check(r, "free_energy_balance", true, "not evaluated: path touches 0 or 1");
    return;
  }
  const auto ledger = free_energy_diagnostic(u, c.params);
  std::ostringstream os;
  os << std::setprecision(17) << "t,lhs,rhs\n";
  for (std::size_t i = 0; i < ledger.times.size(); ++i)
    os << ledger.times[i] << ',' << ledger.lhs[i] << ',' << ledger.rhs[i] << '\n';
  out.write("free_energy.csv", os.str());
  check(r, "free_energy_balance", std::abs(ledger.final_gap) <= 1e-3, "final gap " + fmt(ledger.final_gap));
}

void run_controlled(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto gamma = c.initial_profile();
  const auto field = c.field.build();
  const auto u = solve_controlled(gamma, c.params, *field, c.horizon, {c.grid(), 6});
  write_snapshots(out, u, c.horizon, "density", "controlled density");
  check(r, "density_range", u.min_value() >= -1e-9 && u.max_value() <= 1.0 + 1e-9,
        "range [" + fmt(u.min_value()) + ", " + fmt(u.max_value()) + "]");
  const auto defect = mass_balance_defect(u, c.params, *field);
  double worst = 0.0;
  for (std::size_t i = 2; i < defect.size(); ++i) worst = std::max(worst, std::abs(defect[i]));
  check(r, "mass_balance", worst <= 1e-8, "max defect " + fmt(worst));
}

void run_spectral(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto basis = solve_eigenvalues(c.params, c.modes);
  out.write("eigenvalues.csv", basis.to_csv());
  double worst = 0.0;
  std::vector<double> idx, res;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    worst = std::max(worst, std::abs(basis.residuals[j]));
    idx.push_back(static_cast<double>(j + 1));
    res.push_back(std::max(std::abs(basis.residuals[j]), 1e-300));
  }
  out.figure("residuals.svg", "eigenvalue residuals", "index", "|residual|", {{"residual", idx, res}}, true);
  check(r, "root_residuals", worst < 1e-8, "max residual " + fmt(worst));
  const auto gram = gram_closed_form(basis, std::min<std::size_t>(basis.size(), 64));
  const std::size_t n = std::min<std::size_t>(basis.size(), 64);
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) off = std::max(off, std::abs(gram[i * n + j] - (i == j ? 1.0 : 0.0)));
  check(r, "orthonormality", off < 1e-8, "max |G - I| " + fmt(off));
}

void run_rate(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto gamma = c.initial_profile();
  const auto field = c.field.build();
  const auto u = solve_controlled(gamma, c.params, *field, c.horizon, {c.grid(), 6});
  const auto direct = rate_direct(u, c.params);
  const auto decomposed = rate_decomposed(u, c.params);
  VariationalOptions vo;
  vo.time_hats = c.time_hats;
  vo.cosine_modes = c.cosine_modes;
  const auto variational = rate_variational(u, c.params, vo);
  const auto j = functional_j(u, *field, c.params);
  const double i_total = direct.breakdown.i_total;
  const double i_dec = decomposed.breakdown.i_bulk + decomposed.breakdown.i_boundary;

  json rep;
  rep["i_direct"] = i_total;
  rep["i_bulk"] = direct.breakdown.i_bulk;
  rep["i_boundary"] = direct.breakdown.i_boundary;
  rep["i_first"] = decomposed.breakdown.i_bulk;
  rep["i_second"] = decomposed.breakdown.i_boundary;
  rep["i_variational"] = variational.value;
  rep["variational_converged"] = variational.converged;
  rep["j_given_field"] = j.value;
  rep["direct"] = json::parse(direct.breakdown.to_json());
  out.write("rate.json", rep.dump(2) + "\n");
  out.write("integrands.csv", direct.breakdown.integrands_csv());
  out.write("ascent.csv", variational.trace_csv());
  out.write("coefficients.csv", variational.coefficients_csv());
  std::vector<double> it, val;
  for (const auto& s : variational.trace) {
    it.push_back(static_cast<double>(s.iteration));
    val.push_back(s.value);
  }
  out.figure("ascent.svg", "variational ascent", "iteration", "J", {{"J(c)", it, val}, {"I", it, std::vector<double>(it.size(), i_total)}});

  if (field->is_zero()) {
    check(r, "zero_on_hydrodynamic_path",
          std::abs(i_total) <= 1e-8 && std::abs(i_dec) <= 1e-8 && std::abs(variational.value) <= 1e-8,
          "direct " + fmt(i_total) + " decomposed " + fmt(i_dec) + " variational " + fmt(variational.value));
  } else {
    check(r, "positive", i_total > 0.0, "I " + fmt(i_total));
    check(r, "decomposition", std::abs(i_dec - i_total) <= 1e-3, "I1+I2 " + fmt(i_dec) + " vs I " + fmt(i_total));
    check(r, "given_field", std::abs(j.value - i_total) <= 1e-3, "J " + fmt(j.value) + " vs I " + fmt(i_total));
  }
  check(r, "variational_lower_bound", variational.value <= i_total + 1e-3 && variational.monotone,
        "variational " + fmt(variational.value) + (variational.monotone ? " monotone" : " not monotone"));
}

ExperimentOptions experiment_options(const RunConfig& c) {
  ExperimentOptions o;
  o.seed = c.seed;
  o.jobs = c.jobs;
  o.epsilon = c.epsilon;
  o.grid = c.grid();
  return o;
}

void run_hydro_limit(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto gamma = c.initial_profile();
  const auto field = c.field.build();
  const auto o = experiment_options(c);
  const auto rep = tilted_hydro_check(gamma, c.params, field, c.scales, c.horizon, c.replicas, o);
  out.write("convergence.csv", rep.to_csv());
  out.write("report.json", rep.manifest + "\n");
  std::vector<double> ns, errs, ses;
  for (const auto& s : rep.scales) {
    ns.push_back(s.n_scale);
    errs.push_back(s.sup_error);
    ses.push_back(s.std_error);
  }
  out.figure("convergence.svg", "interior sup error", "N", "error", {{"sup error", ns, errs}, {"std error", ns, ses}},
             true);
  check(r, "monotone_in_n", rep.monotone(), "k_sigma " + fmt(rep.k_sigma));
  check(r, "final_error", rep.within(0.02),
        "sup error " + fmt(rep.scales.back().sup_error) + " se " + fmt(rep.scales.back().std_error));
  bool bounded = true;
  for (const auto& s : rep.scales) bounded = bounded && s.min_density >= 0.0 && s.max_density <= s.density_cap + 1e-12;
  check(r, "density_bounds", bounded, "full-lattice cap " + fmt(rep.scales.back().density_cap));
}

void run_entropy(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto gamma = c.initial_profile();
  const auto field = c.field.build();
  const auto o = experiment_options(c);
  double rate = 0.0;
  if (!field->is_zero())
    rate = rate_direct(solve_controlled(gamma, c.params, *field, c.horizon, {c.grid(), 6}), c.params).breakdown.i_total;
  const int coarse = std::max(4, c.n_scale / 2);
  const auto a = entropy_identity_check(gamma, c.params, field, coarse, c.horizon, c.replicas, o, rate);
  const auto b = entropy_identity_check(gamma, c.params, field, c.n_scale, c.horizon, c.replicas, o, rate);
  json rep;
  rep["coarse"] = json::parse(a.to_json());
  rep["fine"] = json::parse(b.to_json());
  out.write("entropy.json", rep.dump(2) + "\n");
  std::ostringstream os;
  os << std::setprecision(17) << "n,mean,std_error,rate,gap\n";
  for (const auto* e : {&a, &b}) os << e->n_scale << ',' << e->mean << ',' << e->std_error << ',' << e->rate_value << ',' << e->gap << '\n';
  out.write("entropy.csv", os.str());
  if (field->is_zero()) {
    check(r, "zero_field", b.mean == 0.0 && rate == 0.0, "mean " + fmt(b.mean));
    return;
  }
  check(r, "relative_gap", b.relative_gap <= 0.15, "relative gap " + fmt(b.relative_gap));
  check(r, "finite_size_trend", std::abs(b.gap) <= std::abs(a.gap) + 2.0 * std::hypot(a.std_error, b.std_error),
        "gap " + fmt(a.gap) + " -> " + fmt(b.gap));
}

void run_rare_event(const RunConfig& c, Outputs& out, RunResult& r) {
  const auto gamma = c.initial_profile();
  const auto target = c.field.build();
  const auto proposal = c.proposal ? c.proposal->build() : target;
  const auto o = experiment_options(c);
  const auto rep = rare_event_probe(gamma, c.params, target, proposal, c.n_scale, c.horizon, c.replicas,
                                    c.ball_radius, o);
  out.write("rare_event.json", rep.to_json() + "\n");
  check(r, "effective_sample_size", true,
        std::string(rep.degenerate ? "degenerate " : "") + "ess " + fmt(rep.effective_sample_size));
}

}  // namespace

RunResult run(const RunConfig& config) {
  RunResult result;
  fs::path dir = config.output_dir.empty() ? fs::path("robin-sep-out") / scenario_name(config.scenario)
                                           : fs::path(config.output_dir);
  std::unique_ptr<Outputs> out;
  try {
    out = std::make_unique<Outputs>(config, dir);
    out->write("config.ini", config.canonical());
    switch (config.scenario) {
      case Scenario::simulate: run_simulate(config, *out, result); break;
      case Scenario::hydro: run_hydro(config, *out, result); break;
      case Scenario::controlled: run_controlled(config, *out, result); break;
      case Scenario::spectral: run_spectral(config, *out, result); break;
      case Scenario::rate: run_rate(config, *out, result); break;
      case Scenario::hydro_limit: run_hydro_limit(config, *out, result); break;
      case Scenario::entropy: run_entropy(config, *out, result); break;
      case Scenario::rare_event: run_rare_event(config, *out, result); break;
    }
    const bool ok = std::all_of(result.checks.begin(), result.checks.end(), [](const auto& c) { return c.passed; });
    result.exit_code = ok ? exit_pass : exit_invariant;
  } catch (const ConfigError& e) {
    result.exit_code = exit_config;
    result.error = e.what();
  } catch (const InvalidArgument& e) {
    result.exit_code = exit_config;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = exit_numeric;
    result.error = e.what();
  }
  if (out) {
    out->write_manifest(result.exit_code == exit_pass ? "pass" : "fail", result);
    for (const auto& f : out->files()) result.files.push_back((dir / f).string());
    result.files.push_back((dir / "manifest.json").string());
  }
  return result;
}

}  // namespace robin_sep
