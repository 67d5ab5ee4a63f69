#include "robin_sep/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include "json.hpp"
#include <sstream>

#include "robin_sep/errors.hpp"
#include "robin_sep/numerics.hpp"

namespace robin_sep {
namespace {

/// Fenwick tree over 0/1 indicators; find_kth returns the index of the
/// (j+1)-th set indicator.
class IndicatorTree {
 public:
  explicit IndicatorTree(std::size_t n) : n_(n), tree_(n + 1, 0) {
    top_ = 1;
    while (top_ * 2 <= n_) top_ *= 2;
  }
  void add(std::size_t i, int delta) {
    for (std::size_t p = i + 1; p <= n_; p += p & (~p + 1)) tree_[p] += delta;
  }
  std::size_t find_kth(int j) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      if (pos + step <= n_ && tree_[pos + step] <= j) {
        pos += step;
        j -= tree_[pos];
      }
    }
    return pos;
  }

 private:
  std::size_t n_;
  std::size_t top_;
  std::vector<int> tree_;
};

/// Field values at the lattice sites, using the separable structure when
/// available.
class SiteField {
 public:
  SiteField(const TiltField& field, int n) : field_(field), n_(n) {
    separable_ = field.separable();
    if (separable_) {
      h_.resize(static_cast<std::size_t>(n) + 1);
      for (int k = 0; k <= n; ++k) h_[static_cast<std::size_t>(k)] = field.spatial(static_cast<double>(k) / n);
    }
  }
  double at(int k, double t) const {
    if (separable_) return field_.time_factor(t) * h_[static_cast<std::size_t>(k)];
    return field_.value(t, static_cast<double>(k) / n_);
  }
  /// H(t, (k+1)/N) - H(t, k/N).
  double increment(int k, double t) const {
    if (separable_)
      return field_.time_factor(t) * (h_[static_cast<std::size_t>(k) + 1] - h_[static_cast<std::size_t>(k)]);
    return field_.value(t, static_cast<double>(k + 1) / n_) - field_.value(t, static_cast<double>(k) / n_);
  }

 private:
  const TiltField& field_;
  int n_;
  bool separable_ = false;
  std::vector<double> h_;
};

/// Accumulates log dP^H/dP along a trajectory. The compensator is kept per
/// channel (left flip, each bond, right flip): when a channel's state
/// changes, the rate difference is integrated over the interval on which it
/// was constant.
class GirsanovAccumulator {
 public:
  GirsanovAccumulator(const ReservoirParams& params, const TiltField& field,
                      const LatticeConfiguration& config, double t0)
      : params_(params), field_(field), sites_(field, config.n_scale()), n_(config.n_scale()),
        last_(static_cast<std::size_t>(config.n_scale()), t0) {
    static_ = field.time_independent();
    breaks_ = field.time_breakpoints();
    std::sort(breaks_.begin(), breaks_.end());
    n2_ = static_cast<double>(n_) * n_;
  }

  /// Call before applying an event at time t to the configuration.
  void before_event(double t, const JumpEvent& ev, const LatticeConfiguration& c) {
    switch (ev.kind) {
      case EventKind::exchange: {
        const int k = ev.site;
        const int d = c.at(k + 1) - c.at(k);
        jumps_.add(-d * sites_.increment(k, t));
        for (int b = std::max(1, k - 1); b <= std::min(n_ - 2, k + 1); ++b) close_bond(b, t, c);
        if (k == 1) close_left(t, c);
        if (k + 1 == n_ - 1) close_right(t, c);
        break;
      }
      case EventKind::left_flip: {
        const double h = sites_.at(1, t);
        jumps_.add(c.at(1) ? -h : h);
        close_left(t, c);
        close_bond(1, t, c);
        break;
      }
      case EventKind::right_flip: {
        const double h = sites_.at(n_ - 1, t);
        jumps_.add(c.at(n_ - 1) ? -h : h);
        close_right(t, c);
        close_bond(n_ - 2, t, c);
        break;
      }
    }
  }

  double finish(double t, const LatticeConfiguration& c) {
    close_left(t, c);
    for (int b = 1; b <= n_ - 2; ++b) close_bond(b, t, c);
    close_right(t, c);
    return jumps_.value() - compensator_.value();
  }

 private:
  template <class F>
  double integrate(double a, double b, F&& g) const {
    if (b <= a) return 0.0;
    if (static_) return (b - a) * g(a);
    static constexpr double kCap = 1e-2;
    static constexpr std::array<double, 3> nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double total = 0.0;
    double lo = a;
    auto bp = std::upper_bound(breaks_.begin(), breaks_.end(), a);
    while (lo < b) {
      double hi = b;
      if (bp != breaks_.end() && *bp < b) hi = *bp++;
      const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / kCap)));
      const double h = (hi - lo) / pieces;
      for (int p = 0; p < pieces; ++p) {
        const double mid = lo + (p + 0.5) * h;
        for (std::size_t q = 0; q < 3; ++q) total += weights[q] * 0.5 * h * g(mid + 0.5 * h * nodes[q]);
      }
      lo = hi;
    }
    return total;
  }

  void close_bond(int k, double t, const LatticeConfiguration& c) {
    auto& from = last_[static_cast<std::size_t>(k)];
    const int d = c.at(k + 1) - c.at(k);
    if (d != 0) {
      compensator_.add(integrate(from, t, [&](double s) {
        return n2_ * std::expm1(-d * sites_.increment(k, s));
      }));
    }
    from = t;
  }
  void close_left(double t, const LatticeConfiguration& c) {
    auto& from = last_[0];
    const int e = c.at(1);
    const double scale = n_ / params_.cap_a * (e ? 1.0 - params_.alpha : params_.alpha);
    const double sign = e ? -1.0 : 1.0;
    compensator_.add(integrate(from, t, [&](double s) { return scale * std::expm1(sign * sites_.at(1, s)); }));
    from = t;
  }
  void close_right(double t, const LatticeConfiguration& c) {
    auto& from = last_[static_cast<std::size_t>(n_ - 1)];
    const int e = c.at(n_ - 1);
    const double scale = n_ / params_.cap_b * (e ? 1.0 - params_.beta : params_.beta);
    const double sign = e ? -1.0 : 1.0;
    compensator_.add(integrate(from, t, [&](double s) { return scale * std::expm1(sign * sites_.at(n_ - 1, s)); }));
    from = t;
  }

  const ReservoirParams& params_;
  const TiltField& field_;
  SiteField sites_;
  int n_;
  double n2_ = 0.0;
  bool static_ = false;
  std::vector<double> breaks_;
  /// last_[0] left flip, last_[k] bond k, last_[N-1] right flip.
  std::vector<double> last_;
  KahanSum jumps_;
  KahanSum compensator_;
};

void apply(LatticeConfiguration& c, const JumpEvent& ev) {
  if (ev.kind == EventKind::exchange)
    c.exchange(ev.site);
  else
    c.flip(ev.site);
}

std::string kind_name(EventKind k) {
  switch (k) {
    case EventKind::exchange: return "exchange";
    case EventKind::left_flip: return "left";
    case EventKind::right_flip: return "right";
  }
  return "?";
}

}  // namespace

ExclusionSimulator::ExclusionSimulator(const ReservoirParams& params, FieldPtr field)
    : params_(params), field_(std::move(field)) {
  params_.validate();
  if (field_ && field_->is_zero()) field_.reset();
}

SimulationSummary ExclusionSimulator::run(const LatticeConfiguration& initial, double horizon,
                                          CounterRng& rng, const SimulationOptions& options,
                                          std::vector<JumpEvent>* events) const {
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
  const int n = initial.n_scale();
  const double dn = n;
  const double n2 = dn * dn;
  const bool tilted = static_cast<bool>(field_);
  if (tilted) check_field_bounds(*field_, n, horizon);

  SimulationSummary out;
  LatticeConfiguration c = initial;
  const std::size_t bonds = static_cast<std::size_t>(n - 2);
  IndicatorTree tree(bonds);
  int discordant = 0;
  auto disc = [&](int k) { return c.at(k) != c.at(k + 1) ? 1 : 0; };
  for (int k = 1; k <= n - 2; ++k)
    if (disc(k)) {
      tree.add(static_cast<std::size_t>(k - 1), 1);
      ++discordant;
    }

  double h_sup = 0.0, bond_bound = n2;
  std::optional<SiteField> sites;
  std::optional<GirsanovAccumulator> girsanov;
  if (tilted) {
    h_sup = field_->sup_value();
    bond_bound = n2 * std::exp(2.0 * field_->sup_gradient() / dn);
    sites.emplace(*field_, n);
    if (options.compute_weight) girsanov.emplace(params_, *field_, c, 0.0);
  }
  const double boundary_boost = tilted ? std::exp(h_sup) : 1.0;
  const double left_scale = dn / params_.cap_a * boundary_boost;
  const double right_scale = dn / params_.cap_b * boundary_boost;

  std::vector<double> occ_time;
  std::vector<double> occ_since;
  if (options.track_occupation_time) {
    occ_time.assign(static_cast<std::size_t>(n - 1), 0.0);
    occ_since.assign(static_cast<std::size_t>(n - 1), 0.0);
  }
  auto touch_site = [&](int k, double t) {
    if (!options.track_occupation_time) return;
    const auto i = static_cast<std::size_t>(k - 1);
    if (c.at(k)) occ_time[i] += t - occ_since[i];
    occ_since[i] = t;
  };

  std::size_t next_checkpoint = 0;
  auto emit_until = [&](double t, bool inclusive) {
    while (next_checkpoint < options.checkpoints.size()) {
      const double cp = options.checkpoints[next_checkpoint];
      if (cp > horizon || (inclusive ? cp > t : cp >= t)) break;
      if (options.observer) options.observer(next_checkpoint, cp, c);
      ++next_checkpoint;
    }
  };

  auto update_bond = [&](int k, int before) {
    if (k < 1 || k > n - 2) return;
    const int now = disc(k);
    if (now != before) {
      tree.add(static_cast<std::size_t>(k - 1), now - before);
      discordant += now - before;
    }
  };

  double t = 0.0;
  while (true) {
    const double left_bound = left_scale * (c.at(1) ? 1.0 - params_.alpha : params_.alpha);
    const double right_bound = right_scale * (c.at(n - 1) ? 1.0 - params_.beta : params_.beta);
    const double bulk = bond_bound * discordant;
    const double total = bulk + left_bound + right_bound;
    t += rng.exponential(total);
    if (!(t <= horizon)) break;
    ++out.proposals;
    emit_until(t, false);

    JumpEvent ev{t, EventKind::exchange, 0};
    const double u = rng.uniform() * total;
    if (u < left_bound) {
      ev.kind = EventKind::left_flip;
      ev.site = 1;
    } else if (u < left_bound + right_bound) {
      ev.kind = EventKind::right_flip;
      ev.site = n - 1;
    } else {
      int j = static_cast<int>((u - left_bound - right_bound) / bond_bound);
      j = std::clamp(j, 0, discordant - 1);
      ev.site = static_cast<int>(tree.find_kth(j)) + 1;
    }

    if (tilted) {
      double ratio = 1.0;
      switch (ev.kind) {
        case EventKind::exchange: {
          const int d = c.at(ev.site + 1) - c.at(ev.site);
          ratio = n2 * std::exp(-d * sites->increment(ev.site, t)) / bond_bound;
          break;
        }
        case EventKind::left_flip: {
          const double h = sites->at(1, t);
          ratio = std::exp(c.at(1) ? -h : h) / boundary_boost;
          break;
        }
        case EventKind::right_flip: {
          const double h = sites->at(n - 1, t);
          ratio = std::exp(c.at(n - 1) ? -h : h) / boundary_boost;
          break;
        }
      }
      if (ratio > 1.0 + 1e-12) throw InvalidArgument("tilt field violates its declared bounds");
      if (rng.uniform() >= ratio) continue;
    }

    if (girsanov) girsanov->before_event(t, ev, c);
    if (ev.kind == EventKind::exchange) {
      const int k = ev.site;
      const int bl = k > 1 ? disc(k - 1) : 0;
      const int br = k < n - 2 ? disc(k + 1) : 0;
      touch_site(k, t);
      touch_site(k + 1, t);
      c.exchange(k);
      update_bond(k - 1, bl);
      update_bond(k + 1, br);
    } else {
      const int k = ev.site;
      const int b = k == 1 ? 1 : n - 2;
      const int before = disc(b);
      touch_site(k, t);
      c.flip(k);
      update_bond(b, before);
      if (ev.kind == EventKind::left_flip)
        ++out.left_flips;
      else
        ++out.right_flips;
    }
    ++out.accepted_events;
    if (events) events->push_back(ev);
  }

  emit_until(horizon, true);
  if (girsanov) out.log_weight = girsanov->finish(horizon, c);
  if (options.track_occupation_time) {
    for (int k = 1; k < n; ++k) touch_site(k, horizon);
    out.occupation_time = std::move(occ_time);
  }
  out.final_config = std::move(c);
  return out;
}

JumpPath simulate(const LatticeConfiguration& initial, const ReservoirParams& params,
                  const FieldPtr& field, double horizon, std::uint64_t seed) {
  ExclusionSimulator sim(params, field);
  CounterRng rng(seed, stream_id(0, StreamPurpose::dynamics));
  JumpPath path;
  path.initial_config = initial;
  path.start_time = 0.0;
  path.end_time = horizon;
  path.rng_seed = seed;
  path.params = params;
  path.field_id = field ? field->id() : "none";
  SimulationOptions options;
  const auto summary = sim.run(initial, horizon, rng, options, &path.events);
  path.log_weight = summary.log_weight;
  return path;
}

double girsanov_log_weight(const JumpPath& path, const ReservoirParams& params,
                           const TiltField& field) {
  if (auto h = field.horizon(); h && path.end_time > *h * (1.0 + 1e-12))
    throw InvalidArgument("path horizon exceeds the field's horizon");
  if (field.is_zero()) return 0.0;
  LatticeConfiguration c = path.initial_config;
  const int n = c.n_scale();
  GirsanovAccumulator acc(params, field, c, path.start_time);
  double prev = path.start_time;
  bool first = true;
  for (const auto& ev : path.events) {
    if (ev.time < path.start_time || ev.time > path.end_time || (!first && ev.time <= prev))
      throw InvalidArgument("event times must increase within the path window");
    first = false;
    prev = ev.time;
    if (ev.kind == EventKind::exchange) {
      if (ev.site < 1 || ev.site > n - 2 || c.at(ev.site) == c.at(ev.site + 1))
        throw InvalidArgument("impossible exchange event in path");
    } else if ((ev.kind == EventKind::left_flip && ev.site != 1) ||
               (ev.kind == EventKind::right_flip && ev.site != n - 1)) {
      throw InvalidArgument("boundary flip at a non-boundary site");
    }
    acc.before_event(ev.time, ev, c);
    apply(c, ev);
  }
  return acc.finish(path.end_time, c);
}

LatticeConfiguration JumpPath::config_at(double t) const {
  LatticeConfiguration c = initial_config;
  for (const auto& ev : events) {
    if (ev.time > t) break;
    apply(c, ev);
  }
  return c;
}

std::pair<JumpPath, JumpPath> JumpPath::split(double s) const {
  if (!(s > start_time && s < end_time)) throw InvalidArgument("split time must be inside the path");
  JumpPath first = *this, second = *this;
  first.events.clear();
  second.events.clear();
  first.end_time = s;
  second.start_time = s;
  first.log_weight = second.log_weight = 0.0;
  LatticeConfiguration c = initial_config;
  for (const auto& ev : events) {
    if (ev.time <= s) {
      first.events.push_back(ev);
      apply(c, ev);
    } else {
      second.events.push_back(ev);
    }
  }
  second.initial_config = c;
  return {first, second};
}

std::string JumpPath::events_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "time,kind,site\n";
  for (const auto& ev : events) os << ev.time << ',' << kind_name(ev.kind) << ',' << ev.site << '\n';
  return os.str();
}

std::string JumpPath::manifest_json() const {
  nlohmann::ordered_json j;
  j["rng_seed"] = rng_seed;
  j["n_scale"] = initial_config.n_scale();
  j["params"] = {{"alpha", params.alpha}, {"beta", params.beta}, {"A", params.cap_a}, {"B", params.cap_b}};
  j["field_id"] = field_id;
  j["start_time"] = start_time;
  j["end_time"] = end_time;
  j["log_weight"] = log_weight;
  j["events"] = events.size();
  j["initial_particles"] = initial_config.particle_count();
  return j.dump(2);
}

}  // namespace robin_sep
