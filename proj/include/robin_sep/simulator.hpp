#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robin_sep/lattice.hpp"
#include "robin_sep/params.hpp"
#include "robin_sep/tilt_field.hpp"

namespace robin_sep {

enum class EventKind : std::uint8_t { exchange = 0, left_flip = 1, right_flip = 2 };

struct JumpEvent {
  double time = 0.0;
  EventKind kind = EventKind::exchange;
  /// Left site of the bond for exchanges, 1 or N-1 for flips.
  int site = 0;

  bool operator==(const JumpEvent&) const = default;
};

/// A continuous-time trajectory on [start_time, end_time].
struct JumpPath {
  LatticeConfiguration initial_config{3};
  std::vector<JumpEvent> events;
  double start_time = 0.0;
  double end_time = 0.0;
  /// log dP^H/dP of the field the path was simulated under (0 without a field).
  double log_weight = 0.0;
  std::uint64_t rng_seed = 0;
  std::string field_id = "none";
  ReservoirParams params;

  /// Configuration just after all events with time <= t.
  LatticeConfiguration config_at(double t) const;
  /// Splits at a deterministic time s in (start, end). The pieces carry the
  /// events on [start, s] and (s, end] respectively; log weights are left 0.
  std::pair<JumpPath, JumpPath> split(double s) const;

  /// CSV event log: time,kind,site.
  std::string events_csv() const;
  /// JSON manifest: seed, params, field id, log weight, counts.
  std::string manifest_json() const;

  bool operator==(const JumpPath&) const = default;
};

/// Snapshot callback for the streaming simulator: invoked once per
/// checkpoint with the configuration at that time.
using CheckpointObserver = std::function<void(std::size_t index, double time,
                                              const LatticeConfiguration& config)>;

struct SimulationSummary {
  LatticeConfiguration final_config{3};
  std::size_t accepted_events = 0;
  std::size_t proposals = 0;
  std::size_t left_flips = 0;
  std::size_t right_flips = 0;
  double log_weight = 0.0;
  /// Time integral of every site occupation over [0, T].
  std::vector<double> occupation_time;
};

struct SimulationOptions {
  /// Accumulate the Girsanov log weight when a field is present.
  bool compute_weight = true;
  bool track_occupation_time = false;
  std::vector<double> checkpoints;
  CheckpointObserver observer;
};

/// Event-driven simulation of the exclusion process with reservoirs. Without
/// a field the rates are exact (SSEP). With a field the time-dependent rates
/// are sampled by Poisson thinning against dominating rates
/// N^2 exp(2 |grad H|_inf / N) per discordant bond and (N/A) exp(|H|_inf),
/// (N/B) exp(|H|_inf) at the boundaries; the Girsanov log weight is
/// accumulated along the way.
class ExclusionSimulator {
 public:
  ExclusionSimulator(const ReservoirParams& params, FieldPtr field);

  SimulationSummary run(const LatticeConfiguration& initial, double horizon,
                        CounterRng& rng, const SimulationOptions& options,
                        std::vector<JumpEvent>* events = nullptr) const;

 private:
  ReservoirParams params_;
  FieldPtr field_;
};

/// Records a whole trajectory. Deterministic given the seed. field may be null.
JumpPath simulate(const LatticeConfiguration& initial, const ReservoirParams& params,
                  const FieldPtr& field, double horizon, std::uint64_t seed);

/// Replays the path and returns
///   sum_jumps log(tilted rate / untilted rate) - int (tilted total - untilted total) dt.
/// Throws InvalidArgument if the path leaves the field's declared horizon or
/// contains an impossible event.
double girsanov_log_weight(const JumpPath& path, const ReservoirParams& params,
                           const TiltField& field);

}  // namespace robin_sep
