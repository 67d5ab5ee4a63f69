#include <atomic>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "robin_sep/experiments.hpp"
#include "robin_sep/lattice.hpp"

using namespace robin_sep;

namespace {

ExperimentOptions small_options(unsigned jobs) {
  ExperimentOptions o;
  o.seed = 4;
  o.jobs = jobs;
  o.points = 100;
  o.grid = {128, 256, 1};
  return o;
}

}  // namespace

TEST_CASE("parallel_for visits every index once and rethrows failures") {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }), std::runtime_error);
}

TEST_CASE("convergence report is independent of the worker count") {
  const auto p = ReservoirParams::make(0.2, 0.8, 1, 1);
  const Profile gamma = [](double x) { return x < 0.5 ? 1.0 : 0.0; };
  const auto a = hydro_limit_check(gamma, p, {16, 32}, 0.02, 12, small_options(1));
  const auto b = hydro_limit_check(gamma, p, {16, 32}, 0.02, 12, small_options(3));
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.manifest == b.manifest);
  const auto m = nlohmann::json::parse(a.manifest);
  CHECK(m["options"]["seed"] == 4);
  CHECK(m["replicas"] == 12);
  const auto zero = tilted_hydro_check(gamma, p, make_zero_field(), {16, 32}, 0.02, 12, small_options(2));
  CHECK(zero.to_csv() == a.to_csv());
  for (const auto& s : a.scales) {
    CHECK(s.min_density >= 0.0);
    CHECK(s.max_density <= s.density_cap + 1e-12);
    CHECK(s.checkpoints.size() == 3);
    CHECK(s.std_error > 0.0);
  }
}

TEST_CASE("stationary start with equal reservoirs stays within three standard errors") {
  const auto p = ReservoirParams::make(0.5, 0.5, 1, 1);
  const auto rep = hydro_limit_check([](double) { return 0.5; }, p, {64}, 0.05, 40, small_options(1));
  const auto& s = rep.scales.back();
  CHECK(s.sup_error <= 3.0 * s.std_error + 0.1);
  CHECK(rep.within(0.1));
  CHECK(s.density_cap == doctest::Approx(1.0 / default_u_eps(0.05)).epsilon(0.02));
}

TEST_CASE("entropy identity with zero field is exactly zero") {
  const auto p = ReservoirParams::make(0.2, 0.8, 1, 1);
  const auto rep = entropy_identity_check([](double) { return 0.5; }, p, make_zero_field(), 32, 0.05, 6,
                                          small_options(1));
  CHECK(rep.mean == 0.0);
  CHECK(rep.rate_value == 0.0);
  CHECK(rep.std_error == 0.0);
  CHECK(nlohmann::json::parse(rep.to_json())["rate_value"] == 0.0);
}

TEST_CASE("rare-event probe: hydrodynamic target under the untilted law is typical") {
  const auto p = ReservoirParams::make(0.2, 0.8, 1, 1);
  auto o = small_options(1);
  o.grid = {256, 512, 1};
  o.epsilon = 0.2;
  const auto rep = rare_event_probe([](double x) { return 0.4 + 0.2 * x; }, p, make_zero_field(), make_zero_field(),
                                    32, 0.1, 100, 0.15, o);
  CHECK(rep.probability > 0.9);
  CHECK(rep.log_rate < 0.01);
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.rate_value == 0.0);
}

TEST_CASE("matched tilting reaches a displaced target the untilted law misses") {
  const auto p = ReservoirParams::make(0.2, 0.8, 1, 1);
  auto o = small_options(1);
  o.grid = {256, 512, 1};
  o.epsilon = 0.2;
  const Profile gamma = [](double x) { return 0.4 + 0.2 * x; };
  const auto target = make_ramped_field(make_sine_field(3.0, 1), 0.05);
  const auto matched = rare_event_probe(gamma, p, target, target, 16, 0.2, 400, 0.06, o);
  const auto plain = rare_event_probe(gamma, p, target, make_zero_field(), 16, 0.2, 400, 0.06, o);
  CHECK(matched.hits > 10 * (plain.hits + 1));
  CHECK(matched.effective_sample_size > plain.effective_sample_size);
  CHECK(matched.mean_distance < plain.mean_distance);
  CHECK(matched.rate_value > 0.0);
  CHECK_THROWS(rare_event_probe(gamma, p, target, target, 128, 0.1, 10, 0.1, o));
}
