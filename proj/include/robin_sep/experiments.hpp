#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robin_sep/params.hpp"
#include "robin_sep/pde.hpp"
#include "robin_sep/tilt_field.hpp"

namespace robin_sep {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// processed exactly once; callers write into per-index slots so that the
/// result does not depend on scheduling.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

struct ExperimentOptions {
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  double epsilon = 0.05;
  /// Evaluation points per unit length inside [eps, 1 - eps].
  std::size_t points = 200;
  PdeGrid grid{512, 2048, 1};
  /// Number of standard errors used by every statistical pass rule.
  double k_sigma = 3.0;
};

struct ScaleResult {
  int n_scale = 0;
  std::size_t replicas = 0;
  std::vector<double> checkpoints;
  /// Per checkpoint sup and L2 distances on the interior window.
  std::vector<double> sup_errors;
  std::vector<double> l2_errors;
  double sup_error = 0.0;
  /// Largest pointwise standard error of the replica mean.
  double std_error = 0.0;
  /// Range of the replica-averaged smoothed density.
  double min_density = 0.0;
  double max_density = 0.0;
  /// Smoothed density of the full lattice at the evaluation points: an
  /// upper bound for every configuration at this scale.
  double density_cap = 0.0;
  std::size_t events = 0;
};

struct ConvergenceReport {
  std::vector<ScaleResult> scales;
  double k_sigma = 3.0;
  std::string manifest;

  /// Errors decrease across scales up to k combined standard errors.
  bool monotone() const;
  /// Final-scale error within tolerance + k standard errors.
  bool within(double tolerance) const;
  /// CSV with columns n,checkpoint,t,sup_error,l2_error,std_error.
  std::string to_csv() const;
};

/// Replica-averaged smoothed empirical density against the smoothed
/// hydrodynamic solution at T/4, T/2, T, on [eps, 1 - eps].
ConvergenceReport hydro_limit_check(const Profile& gamma, const ReservoirParams& params,
                                    const std::vector<int>& scales, double horizon,
                                    std::size_t replicas, const ExperimentOptions& options);

/// Same protocol for the weakly asymmetric dynamics against solve_controlled.
ConvergenceReport tilted_hydro_check(const Profile& gamma, const ReservoirParams& params,
                                     const FieldPtr& field, const std::vector<int>& scales,
                                     double horizon, std::size_t replicas,
                                     const ExperimentOptions& options);

struct EntropyReport {
  int n_scale = 0;
  std::size_t replicas = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double rate_value = 0.0;
  double relative_gap = 0.0;
  double gap = 0.0;

  std::string to_json() const;
};

/// Averages (1/N) log dP^H/dP over tilted replicas and compares with the
/// closed-form rate of the controlled path.
EntropyReport entropy_identity_check(const Profile& gamma, const ReservoirParams& params,
                                     const FieldPtr& field, int n_scale, double horizon,
                                     std::size_t replicas, const ExperimentOptions& options);

/// Same rate value reused across scales.
EntropyReport entropy_identity_check(const Profile& gamma, const ReservoirParams& params,
                                     const FieldPtr& field, int n_scale, double horizon,
                                     std::size_t replicas, const ExperimentOptions& options,
                                     double rate_value);

struct RareEventReport {
  int n_scale = 0;
  std::size_t replicas = 0;
  double probability = 0.0;
  double log_rate = 0.0;
  double rate_value = 0.0;
  double effective_sample_size = 0.0;
  std::size_t hits = 0;
  /// Replica mean of the time-averaged L1 distance to the target.
  double mean_distance = 0.0;
  bool degenerate = false;

  std::string to_json() const;
};

/// Importance-sampling estimate of P[the smoothed density stays within
/// `radius` of u^H in time-averaged L1 over 8 checkpoints], using
/// `proposal` as the tilting field and `target` to build u^H.
RareEventReport rare_event_probe(const Profile& gamma, const ReservoirParams& params,
                                 const FieldPtr& target, const FieldPtr& proposal,
                                 int n_scale, double horizon, std::size_t replicas,
                                 double radius, const ExperimentOptions& options);

}  // namespace robin_sep
