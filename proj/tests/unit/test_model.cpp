#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "doctest.h"
#include "robin_sep/errors.hpp"
#include "robin_sep/lattice.hpp"
#include "robin_sep/rates.hpp"
#include "robin_sep/rng.hpp"
#include "robin_sep/simulator.hpp"
#include "support.hpp"

using namespace robin_sep;

TEST_CASE("philox4x64-10 matches the published known-answer vectors") {
  using B = CounterRng::Block;
  CHECK(CounterRng::philox({0, 0, 0, 0}, {0, 0}) ==
        B{0x16554d9eca36314cull, 0xdb20fe9d672d0fdcull, 0xd7e772cee186176bull, 0x7e68b68aec7ba23bull});
  CHECK(CounterRng::philox({~0ull, ~0ull, ~0ull, ~0ull}, {~0ull, ~0ull}) ==
        B{0x87b092c3013fe90bull, 0x438c3c67be8d0224ull, 0x9cc7d7c69cd777b6ull, 0xa09caebf594f0ba0ull});
  CHECK(CounterRng::philox({0x243f6a8885a308d3ull, 0x13198a2e03707344ull, 0xa4093822299f31d0ull,
                            0x082efa98ec4e6c89ull},
                           {0x452821e638d01377ull, 0xbe5466cf34e90c6cull}) ==
        B{0xa528f45403e61d95ull, 0x38c72dbd566e9788ull, 0xa5a1610e72fd18b5ull, 0x57bd43b5e52b7fe6ull});
}

TEST_CASE("counter rng stream matches numpy Philox(key=[0,0]) first draw") {
  CounterRng rng(0, 0);
  CHECK(rng.next_u64() == 0x02f4ba6408e4d89bull);
}

TEST_CASE("uniforms lie in [0,1) and streams are independent of draw order") {
  CounterRng a(7, stream_id(3, StreamPurpose::dynamics));
  CounterRng b(7, stream_id(3, StreamPurpose::dynamics));
  CounterRng other(7, stream_id(4, StreamPurpose::dynamics));
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
  CHECK(a.uniform() != other.uniform());
}

TEST_CASE("reservoir parameters reject violated invariants") {
  CHECK_THROWS_AS(ReservoirParams::make(0.9, 0.1, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(ReservoirParams::make(0.0, 0.5, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(ReservoirParams::make(0.2, 0.5, 0, 1), InvalidArgument);
  CHECK_NOTHROW(ReservoirParams::make(0.3, 0.3, 2, 0.5));
}

TEST_CASE("ssep rates on small configurations") {
  const auto half = ReservoirParams::make(0.5, 0.5, 1, 1);
  const auto empty = ssep_rates(LatticeConfiguration(4), half);
  CHECK(empty.bond == std::vector<double>{0.0, 0.0});
  CHECK(empty.left_flip == doctest::Approx(2.0));
  CHECK(empty.right_flip == doctest::Approx(2.0));

  const auto alt = ssep_rates(LatticeConfiguration(4, {1, 0, 1}), half);
  CHECK(alt.bond == std::vector<double>{16.0, 16.0});

  const auto dry = ssep_rates(LatticeConfiguration(4), ReservoirParams::make(1e-12, 0.5, 1, 1));
  CHECK(dry.left_flip < 1e-10);
}

TEST_CASE("wasep rates reduce to ssep for zero and constant fields") {
  const auto p = ReservoirParams::make(0.2, 0.7, 0.5, 2.0);
  test_support::Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen.integer(3, 20);
    std::vector<int> occ(n - 1);
    for (auto& o : occ) o = gen.integer(0, 1);
    const LatticeConfiguration c(n, occ);
    CHECK(wasep_rates(c, p, *make_zero_field(), 0.3) == ssep_rates(c, p));
    const auto w = wasep_rates(c, p, test_support::ConstantField(0.7), 0.0);
    CHECK(w.bond == ssep_rates(c, p).bond);
  }
}

TEST_CASE("wasep bond rate picks up the field increment") {
  const auto p = ReservoirParams::make(0.5, 0.5, 1, 1);
  const auto r = wasep_rates(LatticeConfiguration(3, {1, 0}), p, *make_affine_field(1.0), 0.0);
  REQUIRE(r.bond.size() == 1);
  CHECK(r.bond[0] == doctest::Approx(9.0 * std::exp(1.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("sample_profile extremes and concentration") {
  CHECK(sample_profile([](double) { return 0.0; }, 50, 1).particle_count() == 0);
  CHECK(sample_profile([](double) { return 1.0; }, 50, 1).particle_count() == 49);
  const auto c = sample_profile([](double) { return 0.5; }, 10000, 5);
  const double mass = EmpiricalMeasure::of(c).total_mass();
  CHECK(std::abs(mass - 0.5) <= 0.015);
}

TEST_CASE("empirical density: empty configuration and full-lattice plateau") {
  const std::vector<double> xs{0.2, 0.5, 0.8};
  for (double v : empirical_density(EmpiricalMeasure::of(LatticeConfiguration(100)), 0.05, 1.05, xs))
    CHECK(v == 0.0);
  std::vector<int> ones(3999, 1);
  const auto full = empirical_density(EmpiricalMeasure::of(LatticeConfiguration(4000, ones)), 0.05, 1.05, xs);
  for (double v : full) CHECK(v == doctest::Approx(1.0 / 1.05).epsilon(1e-3));
}

TEST_CASE("simulate: zero horizon and determinism") {
  const auto p = ReservoirParams::make(0.2, 0.8, 1, 1);
  const auto init = sample_profile([](double) { return 0.5; }, 32, 3);
  CHECK(simulate(init, p, nullptr, 0.0, 9).events.empty());
  const auto field = make_sine_field(0.5, 1);
  const auto a = simulate(init, p, field, 0.05, 9);
  const auto b = simulate(init, p, field, 0.05, 9);
  CHECK(a == b);
  CHECK(!a.events.empty());
  CHECK(a.events_csv() == b.events_csv());
}

TEST_CASE("product Bernoulli(1/2) is stationary when alpha = beta = 1/2") {
  const auto p = ReservoirParams::make(0.5, 0.5, 1, 1);
  const int n = 8;
  const double horizon = 0.25;
  const std::size_t replicas = 10000;
  const ExclusionSimulator sim(p, nullptr);
  std::vector<double> sum(n - 1, 0.0), sum2(n - 1, 0.0);
  SimulationOptions opts;
  opts.track_occupation_time = true;
  for (std::size_t r = 0; r < replicas; ++r) {
    CounterRng init(21, stream_id(r, StreamPurpose::initial_config));
    CounterRng dyn(21, stream_id(r, StreamPurpose::dynamics));
    const auto s = sim.run(sample_profile([](double) { return 0.5; }, n, init), horizon, dyn, opts);
    for (int k = 0; k < n - 1; ++k) {
      const double v = s.occupation_time[k] / horizon;
      sum[k] += v;
      sum2[k] += v * v;
    }
  }
  for (int k = 0; k < n - 1; ++k) {
    const double mean = sum[k] / replicas;
    const double se = std::sqrt((sum2[k] / replicas - mean * mean) / (replicas - 1));
    CHECK(std::abs(mean - 0.5) <= 3.0 * se);
  }
}

namespace {

/// Generator of the N = 4 chain (three sites) written out independently of
/// the library rate code.
Eigen::Matrix<double, 8, 8> generator(const ReservoirParams& p, const TiltField& f, double t) {
  constexpr int n = 4;
  Eigen::Matrix<double, 8, 8> q = Eigen::Matrix<double, 8, 8>::Zero();
  for (int s = 0; s < 8; ++s) {
    auto occ = [&](int k) { return (s >> (k - 1)) & 1; };
    auto add = [&](int target, double rate) {
      q(s, target) += rate;
      q(s, s) -= rate;
    };
    for (int k = 1; k <= 2; ++k) {
      if (occ(k) == occ(k + 1)) continue;
      const double dh = f.value(t, (k + 1.0) / n) - f.value(t, k / static_cast<double>(n));
      const double rate = n * n * std::exp(-(occ(k + 1) - occ(k)) * dh);
      add(s ^ (1 << (k - 1)) ^ (1 << k), rate);
    }
    const double hl = f.value(t, 1.0 / n);
    const double hr = f.value(t, 3.0 / n);
    add(s ^ 1, n / p.cap_a * (occ(1) ? (1 - p.alpha) * std::exp(-hl) : p.alpha * std::exp(hl)));
    add(s ^ 4, n / p.cap_b * (occ(3) ? (1 - p.beta) * std::exp(-hr) : p.beta * std::exp(hr)));
  }
  return q;
}

}  // namespace

TEST_CASE("thinning simulator reproduces the Kolmogorov forward law of a tilted 3-site chain") {
  const auto p = ReservoirParams::make(0.3, 0.6, 0.7, 1.5);
  const auto field = make_ramped_field(make_sine_field(0.8, 1), 0.05);
  const double horizon = 0.1;
  const int start = 0b001;

  Eigen::Matrix<double, 1, 8> law = Eigen::Matrix<double, 1, 8>::Zero();
  law(start) = 1.0;
  const int steps = 20000;
  const double dt = horizon / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = i * dt;
    const Eigen::Matrix<double, 1, 8> k1 = law * generator(p, *field, t);
    const Eigen::Matrix<double, 1, 8> k2 = (law + 0.5 * dt * k1) * generator(p, *field, t + 0.5 * dt);
    const Eigen::Matrix<double, 1, 8> k3 = (law + 0.5 * dt * k2) * generator(p, *field, t + 0.5 * dt);
    const Eigen::Matrix<double, 1, 8> k4 = (law + dt * k3) * generator(p, *field, t + dt);
    law += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(law.sum() == doctest::Approx(1.0).epsilon(1e-12));

  const ExclusionSimulator sim(p, field);
  const std::size_t replicas = 40000;
  std::array<double, 8> counts{};
  SimulationOptions opts;
  opts.compute_weight = false;
  for (std::size_t r = 0; r < replicas; ++r) {
    CounterRng rng(5, stream_id(r, StreamPurpose::dynamics));
    const auto s = sim.run(LatticeConfiguration(4, {1, 0, 0}), horizon, rng, opts);
    counts[s.final_config.at(1) + 2 * s.final_config.at(2) + 4 * s.final_config.at(3)] += 1.0;
  }
  for (int s = 0; s < 8; ++s) {
    const double phat = counts[s] / replicas;
    const double se = std::sqrt(law(s) * (1 - law(s)) / replicas);
    CHECK(std::abs(phat - law(s)) <= 4.0 * se + 1e-4);
  }
}

TEST_CASE("girsanov weight of a single left flip under a constant field") {
  const double h = 0.37, tau = 0.3, horizon = 0.8;
  const auto p = ReservoirParams::make(0.25, 0.6, 0.5, 2.0);
  JumpPath path;
  path.initial_config = LatticeConfiguration(3);
  path.events = {{tau, EventKind::left_flip, 1}};
  path.end_time = horizon;
  path.params = p;
  const double n = 3.0;
  const double eh = std::expm1(h), emh = std::expm1(-h);
  const double right = n / p.cap_b * p.beta * eh;
  const double before = n / p.cap_a * p.alpha * eh + right;
  const double after = n / p.cap_a * (1 - p.alpha) * emh + right;
  const double expected = h - (tau * before + (horizon - tau) * after);
  CHECK(girsanov_log_weight(path, p, test_support::ConstantField(h)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(girsanov_log_weight(path, p, *make_zero_field()) == 0.0);
}

TEST_CASE("girsanov weight is additive over a split and matches the simulator's accumulator") {
  const auto p = ReservoirParams::make(0.2, 0.8, 1, 1);
  const auto field = make_ramped_field(make_sine_field(0.6, 1), 0.04);
  const auto init = sample_profile([](double x) { return 0.3 + 0.4 * x; }, 40, 2);
  const auto path = simulate(init, p, field, 0.1, 17);
  const double full = girsanov_log_weight(path, p, *field);
  CHECK(full == doctest::Approx(path.log_weight).epsilon(1e-10));
  for (double s : {0.013, 0.04, 0.077}) {
    const auto [a, b] = path.split(s);
    CHECK(a.events.size() + b.events.size() == path.events.size());
    CHECK(b.initial_config == path.config_at(s));
    const double sum = girsanov_log_weight(a, p, *field) + girsanov_log_weight(b, p, *field);
    CHECK(sum == doctest::Approx(full).epsilon(1e-10));
  }
}
