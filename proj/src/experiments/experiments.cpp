#include "robin_sep/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "robin_sep/errors.hpp"
#include "robin_sep/lattice.hpp"
#include "robin_sep/numerics.hpp"
#include "robin_sep/rate.hpp"
#include "robin_sep/simulator.hpp"

namespace robin_sep {

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<double> window_points(const ExperimentOptions& o) {
  const auto count = static_cast<std::size_t>(std::llround(static_cast<double>(o.points) * (1.0 - 2.0 * o.epsilon)));
  std::vector<double> xs(count + 1);
  for (std::size_t i = 0; i <= count; ++i)
    xs[i] = o.epsilon + (1.0 - 2.0 * o.epsilon) * static_cast<double>(i) / static_cast<double>(count);
  return xs;
}

std::uint64_t replica_key(int n_scale, std::size_t replica) {
  return (static_cast<std::uint64_t>(n_scale) << 32) | static_cast<std::uint64_t>(replica);
}

nlohmann::ordered_json params_json(const ReservoirParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"A", p.cap_a}, {"B", p.cap_b}};
}

nlohmann::ordered_json options_json(const ExperimentOptions& o) {
  return {{"seed", o.seed},
          {"epsilon", o.epsilon},
          {"u_eps", default_u_eps(o.epsilon)},
          {"points", o.points},
          {"space_intervals", o.grid.space_intervals},
          {"time_steps", o.grid.time_steps},
          {"k_sigma", o.k_sigma}};
}

struct ReplicaSnapshots {
  /// densities[c][x] for every checkpoint c.
  std::vector<std::vector<double>> densities;
  std::size_t events = 0;
};

ConvergenceReport convergence(const Profile& gamma, const ReservoirParams& params, const FieldPtr& field,
                              const DensityPath& reference, const std::vector<int>& scales, double horizon,
                              std::size_t replicas, const ExperimentOptions& options) {
  if (replicas < 2) throw InvalidArgument("need at least two replicas");
  const std::vector<double> checkpoints{horizon / 4.0, horizon / 2.0, horizon};
  const auto xs = window_points(options);
  const double u_eps = default_u_eps(options.epsilon);
  std::vector<std::vector<double>> ref;
  for (double cp : checkpoints) ref.push_back(smooth_grid_density(reference.slice_at(cp), options.epsilon, u_eps, xs));
  const auto xw = trapezoid_weights(xs);

  ConvergenceReport report;
  report.k_sigma = options.k_sigma;
  const ExclusionSimulator sim(params, field);
  for (int n : scales) {
    std::vector<ReplicaSnapshots> runs(replicas);
    parallel_for(replicas, options.jobs, [&](std::size_t r) {
      CounterRng init(options.seed, stream_id(replica_key(n, r), StreamPurpose::initial_config));
      CounterRng dyn(options.seed, stream_id(replica_key(n, r), StreamPurpose::dynamics));
      const auto config = sample_profile(gamma, n, init);
      auto& out = runs[r];
      out.densities.resize(checkpoints.size());
      SimulationOptions so;
      so.compute_weight = false;
      so.checkpoints = checkpoints;
      so.observer = [&](std::size_t c, double, const LatticeConfiguration& conf) {
        out.densities[c] = empirical_density(EmpiricalMeasure::of(conf), options.epsilon, u_eps, xs);
      };
      out.events = sim.run(config, horizon, dyn, so).accepted_events;
    });

    ScaleResult sr;
    sr.n_scale = n;
    sr.replicas = replicas;
    sr.checkpoints = checkpoints;
    sr.min_density = 1e300;
    sr.max_density = -1e300;
    for (const auto& r : runs) sr.events += r.events;
    const auto full = empirical_density(
        EmpiricalMeasure::of(LatticeConfiguration(n, std::vector<int>(static_cast<std::size_t>(n - 1), 1))),
        options.epsilon, u_eps, xs);
    sr.density_cap = *std::max_element(full.begin(), full.end());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      double sup = 0.0;
      KahanSum l2;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        KahanSum s;
        for (const auto& r : runs) s.add(r.densities[c][k]);
        const double mean = s.value() / static_cast<double>(replicas);
        KahanSum v;
        for (const auto& r : runs) v.add((r.densities[c][k] - mean) * (r.densities[c][k] - mean));
        const double se = std::sqrt(v.value() / static_cast<double>(replicas - 1) / static_cast<double>(replicas));
        sr.std_error = std::max(sr.std_error, se);
        sr.min_density = std::min(sr.min_density, mean);
        sr.max_density = std::max(sr.max_density, mean);
        const double e = mean - ref[c][k];
        sup = std::max(sup, std::abs(e));
        l2.add(xw[k] * e * e);
      }
      sr.sup_errors.push_back(sup);
      sr.l2_errors.push_back(std::sqrt(l2.value()));
    }
    sr.sup_error = *std::max_element(sr.sup_errors.begin(), sr.sup_errors.end());
    report.scales.push_back(std::move(sr));
  }

  nlohmann::ordered_json m;
  m["params"] = params_json(params);
  m["field"] = field ? field->id() : "none";
  m["horizon"] = horizon;
  m["replicas"] = replicas;
  m["scales"] = scales;
  m["options"] = options_json(options);
  m["streams"] = "key=(seed, (n<<40)|(replica<<8)|purpose)";
  report.manifest = m.dump(2);
  return report;
}

}  // namespace

bool ConvergenceReport::monotone() const {
  for (std::size_t i = 1; i < scales.size(); ++i) {
    const auto& a = scales[i - 1];
    const auto& b = scales[i];
    const double radius = k_sigma * std::hypot(a.std_error, b.std_error);
    if (b.sup_error > a.sup_error + radius) return false;
  }
  return true;
}

bool ConvergenceReport::within(double tolerance) const {
  if (scales.empty()) return false;
  return scales.back().sup_error <= tolerance + k_sigma * scales.back().std_error;
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "n,checkpoint,t,sup_error,l2_error,std_error\n";
  for (const auto& s : scales)
    for (std::size_t c = 0; c < s.checkpoints.size(); ++c)
      os << s.n_scale << ',' << c << ',' << s.checkpoints[c] << ',' << s.sup_errors[c] << ',' << s.l2_errors[c] << ','
         << s.std_error << '\n';
  return os.str();
}

ConvergenceReport hydro_limit_check(const Profile& gamma, const ReservoirParams& params,
                                    const std::vector<int>& scales, double horizon, std::size_t replicas,
                                    const ExperimentOptions& options) {
  const auto reference = solve_hydrodynamic(gamma, params, horizon, options.grid);
  return convergence(gamma, params, nullptr, reference, scales, horizon, replicas, options);
}

ConvergenceReport tilted_hydro_check(const Profile& gamma, const ReservoirParams& params, const FieldPtr& field,
                                     const std::vector<int>& scales, double horizon, std::size_t replicas,
                                     const ExperimentOptions& options) {
  if (!field || field->is_zero()) return hydro_limit_check(gamma, params, scales, horizon, replicas, options);
  const auto reference = solve_controlled(gamma, params, *field, horizon, {options.grid, 6});
  return convergence(gamma, params, field, reference, scales, horizon, replicas, options);
}

std::string EntropyReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_scale"] = n_scale;
  j["replicas"] = replicas;
  j["mean_log_weight_over_n"] = mean;
  j["std_error"] = std_error;
  j["rate_value"] = rate_value;
  j["gap"] = gap;
  j["relative_gap"] = relative_gap;
  return j.dump(2);
}

EntropyReport entropy_identity_check(const Profile& gamma, const ReservoirParams& params, const FieldPtr& field,
                                     int n_scale, double horizon, std::size_t replicas,
                                     const ExperimentOptions& options) {
  double rate = 0.0;
  if (field && !field->is_zero()) {
    const auto u = solve_controlled(gamma, params, *field, horizon, {options.grid, 6});
    rate = rate_direct(u, params).breakdown.i_total;
  }
  return entropy_identity_check(gamma, params, field, n_scale, horizon, replicas, options, rate);
}

EntropyReport entropy_identity_check(const Profile& gamma, const ReservoirParams& params, const FieldPtr& field,
                                     int n_scale, double horizon, std::size_t replicas,
                                     const ExperimentOptions& options, double rate_value) {
  if (replicas < 2) throw InvalidArgument("need at least two replicas");
  const ExclusionSimulator sim(params, field);
  std::vector<double> weights(replicas);
  parallel_for(replicas, options.jobs, [&](std::size_t r) {
    CounterRng init(options.seed, stream_id(replica_key(n_scale, r), StreamPurpose::initial_config));
    CounterRng dyn(options.seed, stream_id(replica_key(n_scale, r), StreamPurpose::dynamics));
    const auto config = sample_profile(gamma, n_scale, init);
    weights[r] = sim.run(config, horizon, dyn, {}).log_weight / n_scale;
  });
  KahanSum s;
  for (double w : weights) s.add(w);
  EntropyReport rep;
  rep.n_scale = n_scale;
  rep.replicas = replicas;
  rep.mean = s.value() / static_cast<double>(replicas);
  KahanSum v;
  for (double w : weights) v.add((w - rep.mean) * (w - rep.mean));
  rep.std_error = std::sqrt(v.value() / static_cast<double>(replicas - 1) / static_cast<double>(replicas));
  rep.rate_value = rate_value;
  rep.gap = rep.mean - rate_value;
  rep.relative_gap = rate_value > 0.0 ? std::abs(rep.gap) / rate_value : std::abs(rep.gap);
  return rep;
}

std::string RareEventReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_scale"] = n_scale;
  j["replicas"] = replicas;
  j["probability"] = probability;
  j["minus_log_probability_over_n"] = std::isfinite(log_rate) ? nlohmann::ordered_json(log_rate) : nullptr;
  j["rate_value"] = rate_value;
  j["effective_sample_size"] = effective_sample_size;
  j["hits"] = hits;
  j["mean_distance"] = mean_distance;
  j["degenerate"] = degenerate;
  j["asserted"] = false;
  return j.dump(2);
}

RareEventReport rare_event_probe(const Profile& gamma, const ReservoirParams& params, const FieldPtr& target,
                                 const FieldPtr& proposal, int n_scale, double horizon, std::size_t replicas,
                                 double radius, const ExperimentOptions& options) {
  if (n_scale > 64) throw InvalidArgument("rare_event_probe is meant for N <= 64");
  const FieldPtr tgt = target ? target : make_zero_field();
  const auto u = solve_controlled(gamma, params, *tgt, horizon, {options.grid, 6});
  std::vector<double> checkpoints;
  for (int k = 1; k <= 8; ++k) checkpoints.push_back(horizon * k / 8.0);
  const auto xs = window_points(options);
  const auto xw = trapezoid_weights(xs);
  const double u_eps = default_u_eps(options.epsilon);
  std::vector<std::vector<double>> ref;
  for (double cp : checkpoints) ref.push_back(smooth_grid_density(u.slice_at(cp), options.epsilon, u_eps, xs));

  const ExclusionSimulator sim(params, proposal);
  std::vector<double> distance(replicas), logw(replicas);
  parallel_for(replicas, options.jobs, [&](std::size_t r) {
    CounterRng init(options.seed, stream_id(replica_key(n_scale, r), StreamPurpose::initial_config));
    CounterRng dyn(options.seed, stream_id(replica_key(n_scale, r), StreamPurpose::dynamics));
    const auto config = sample_profile(gamma, n_scale, init);
    double d = 0.0;
    SimulationOptions so;
    so.checkpoints = checkpoints;
    so.observer = [&](std::size_t c, double, const LatticeConfiguration& conf) {
      const auto dens = empirical_density(EmpiricalMeasure::of(conf), options.epsilon, u_eps, xs);
      for (std::size_t k = 0; k < xs.size(); ++k) d += xw[k] * std::abs(dens[k] - ref[c][k]) / 8.0;
    };
    logw[r] = sim.run(config, horizon, dyn, so).log_weight;
    distance[r] = d;
  });

  RareEventReport rep;
  rep.n_scale = n_scale;
  rep.replicas = replicas;
  rep.rate_value = (target && !target->is_zero()) ? rate_direct(u, params).breakdown.i_total : 0.0;
  KahanSum sw, sw2, sd;
  for (double d : distance) sd.add(d);
  rep.mean_distance = sd.value() / static_cast<double>(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    if (distance[r] > radius) continue;
    ++rep.hits;
    const double w = std::exp(-logw[r]);
    sw.add(w);
    sw2.add(w * w);
  }
  rep.probability = sw.value() / static_cast<double>(replicas);
  rep.effective_sample_size = sw2.value() > 0.0 ? sw.value() * sw.value() / sw2.value() : 0.0;
  rep.degenerate = rep.effective_sample_size < 10.0;
  rep.log_rate = rep.probability > 0.0 ? -std::log(rep.probability) / n_scale : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace robin_sep
