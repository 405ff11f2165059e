#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "quadrant/chains.hpp"
#include "quadrant/error.hpp"
#include "quadrant/simulate.hpp"
#include "support.hpp"

using namespace quadrant;
using testing_support::builtin;

namespace {

QuadrantModel all_point_mass(Offset d) {
  const auto law = StepDistribution::from_masses({{d.di, d.dj, 1.0}});
  return QuadrantModel(1, law, {law}, {law}, {law});
}

// Drift towards the corner from everywhere, so the walk is positive recurrent.
QuadrantModel recurrent_model() {
  return QuadrantModel(
      1, builtin("nonsym").interior(),
      {StepDistribution::from_masses({{1, 0, 1.0 / 6}, {-1, 0, 1.0 / 3}, {0, 1, 1.0 / 8}, {0, 0, 3.0 / 8}})},
      {StepDistribution::from_masses({{0, 1, 1.0 / 8}, {0, -1, 3.0 / 8}, {1, 0, 1.0 / 6}, {0, 0, 1.0 / 3}})},
      {StepDistribution::from_masses({{1, 0, 0.5}, {0, 1, 0.5}})});
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  auto a = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(a[0] == 0x6627e8d5u);
  CHECK(a[1] == 0xe169c58du);
  CHECK(a[2] == 0xbc57ac4cu);
  CHECK(a[3] == 0x9b00dbd8u);
  auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(b[0] == 0x408f276du);
  CHECK(b[1] == 0x41c83b0eu);
  CHECK(b[2] == 0xa20bc7c6u);
  CHECK(b[3] == 0x6d5451fdu);
  auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(c[0] == 0xd16cfe09u);
  CHECK(c[1] == 0x94fdccebu);
  CHECK(c[2] == 0x5001e420u);
  CHECK(c[3] == 0x24126ea1u);
}

TEST_CASE("counter rng is order independent and uniform") {
  const CounterRng rng(42, 7);
  const double u5 = rng.uniform(5);
  for (std::uint64_t s = 0; s < 10; ++s) rng.uniform(s);
  CHECK(rng.uniform(5) == u5);
  CHECK(CounterRng(42, 8).uniform(5) != u5);
  double mean = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform(std::uint64_t(k), 1);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK(std::abs(mean / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
}

TEST_CASE("deterministic point-mass path") {
  const auto m = all_point_mass({1, 0});
  PathConfig cfg;
  cfg.start = {0, 0};
  cfg.max_steps = 5;
  const auto path = simulate_path(m, cfg);
  REQUIRE(path.size() == 6);
  for (long n = 0; n <= 5; ++n) CHECK(path[n] == State{n, 0});
}

TEST_CASE("same seed and stream give the same path") {
  const auto m = builtin("reference");
  PathConfig cfg;
  cfg.start = {3, 4};
  cfg.max_steps = 500;
  cfg.seed = 99;
  cfg.stream = 3;
  CHECK(simulate_path(m, cfg) == simulate_path(m, cfg));
  auto other = cfg;
  other.stream = 4;
  CHECK(simulate_path(m, cfg) != simulate_path(m, other));
}

TEST_CASE("empirical interior mean step matches the drift") {
  const auto m = builtin("nonsym");
  PathConfig cfg;
  cfg.kind = LocalModel::Kind::Z0;
  cfg.start = {50, 50};
  cfg.max_steps = 100000;
  cfg.seed = 1;
  const auto path = simulate_path(m, cfg);
  double sx = 0, sy = 0;
  for (std::size_t n = 1; n < path.size(); ++n) {
    sx += double(path[n].i - path[n - 1].i);
    sy += double(path[n].j - path[n - 1].j);
  }
  const double n = double(cfg.max_steps);
  // Per-step variances: E(di^2) - m1^2 = 1/2 - 1/36, E(dj^2) - m2^2 = 1/2 - 1/16.
  CHECK(std::abs(sx / n + 1.0 / 6) < 3 * std::sqrt((0.5 - 1.0 / 36) / n));
  CHECK(std::abs(sy / n + 0.25) < 3 * std::sqrt((0.5 - 1.0 / 16) / n));
}

TEST_CASE("one-step law passes a chi-square test") {
  const auto m = builtin("reference");
  for (State s : {State{0, 0}, State{0, 5}, State{5, 0}, State{5, 5}}) {
    const auto& law = m.at(s.i, s.j);
    const CounterRng rng(2024, std::uint64_t(s.i * 100 + s.j));
    const int n = 100000;
    std::map<Offset, int> counts;
    for (int k = 0; k < n; ++k) ++counts[sample_step(law, rng.uniform(std::uint64_t(k)))];
    double chi2 = 0.0;
    int cells = 0;
    for (const auto& e : law.entries()) {
      if (e.p <= 0.0) continue;
      const double expected = n * e.p;
      const double diff = counts[e.step] - expected;
      chi2 += diff * diff / expected;
      ++cells;
    }
    CHECK(counts.size() == std::size_t(cells));
    const boost::math::chi_squared dist(cells - 1);
    CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.001);
  }
}

TEST_CASE("hitting times: definitions") {
  const auto m = builtin("reference");
  ReplicaConfig cfg;
  cfg.start = {2, 0};
  cfg.max_steps = 2000;
  cfg.replicas = 4000;
  cfg.seed = 5;
  const auto rep = hitting_times(m, {HittingSpec::parse("tau"), HittingSpec::parse("T1(2)")}, cfg);
  const auto& tau = rep.stats[0];
  CHECK(tau.finite + tau.censored == tau.replicas);
  for (long v : rep.stats[1].values) CHECK(v >= 1);
  // From (2,0) the horizontal-strip law moves to j = 1 with probability 1/4.
  long ones = 0;
  for (long v : tau.values) ones += v == 1;
  const double p = 0.75, n = double(cfg.replicas);
  CHECK(std::abs(ones / n - p) < 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("hitting times: first return for a self-loop-free column") {
  // Interior X marginal without self loops: T1(k) is the return time of X1 to k.
  const auto m = builtin("reference");
  const QuadrantModel nl(1, StepDistribution::from_masses({{1, 1, 0.2}, {-1, -1, 0.5}, {1, -1, 0.1}, {-1, 1, 0.2}}),
                         {m.horizontal(0)}, {StepDistribution::from_masses({{1, 1, 0.5}, {1, -1, 0.5}})},
                         {m.corner(0, 0)});
  ReplicaConfig cfg;
  cfg.start = {3, 0};
  cfg.max_steps = 5000;
  cfg.replicas = 500;
  const auto rep = hitting_times(nl, {HittingSpec::parse("T1(3)")}, cfg);
  for (long v : rep.stats[0].values) CHECK(v % 2 == 0);  // parity of a nearest-neighbour return
  CHECK(rep.stats[0].finite > 400);
}

TEST_CASE("escape from the horizontal strip gets likelier with height") {
  const auto m = builtin("reference");
  double prev = 1.0;
  for (long j : {1L, 3L, 6L, 10L}) {
    ReplicaConfig cfg;
    cfg.start = {0, j};
    cfg.max_steps = 3000;
    cfg.replicas = 2000;
    cfg.seed = 11;
    const auto rep = hitting_times(m, {HittingSpec::parse("tau1")}, cfg);
    const double frac = double(rep.stats[0].finite) / double(cfg.replicas);
    CHECK(frac <= prev + 0.02);
    prev = frac;
  }
  CHECK(prev < 0.2);
}

TEST_CASE("hitting spec parsing") {
  CHECK(HittingSpec::parse("tau(3,4)").label() == "tau(3,4)");
  CHECK(HittingSpec::parse("tau1(0,2)").name == "tau1(k,l)");
  CHECK(HittingSpec::parse("T1k:5").k == 5);
  CHECK(HittingSpec::parse("Tk:2").label() == "Tk:2");
  CHECK(HittingSpec::parse("tau2(7)").k == 7);
  CHECK_THROWS_AS(HittingSpec::parse("sigma"), ValidationError);
}

TEST_CASE("replicas split across workers give identical statistics") {
  const auto m = builtin("reference");
  ReplicaConfig cfg;
  cfg.start = {1, 1};
  cfg.max_steps = 400;
  cfg.replicas = 257;
  cfg.seed = 77;
  const std::vector<HittingSpec> specs{HittingSpec::parse("tau"), HittingSpec::parse("Tk:3"),
                                       HittingSpec::parse("tau2(0)")};
  cfg.workers = 1;
  const auto a = hitting_times(m, specs, cfg);
  cfg.workers = 3;
  const auto b = hitting_times(m, specs, cfg);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    CHECK(a.stats[s].values == b.stats[s].values);
    CHECK(a.stats[s].mean == b.stats[s].mean);
  }
  // Two halves on disjoint stream ranges merge to the full run.
  cfg.replicas = 128;
  const auto lo = hitting_times(m, specs, cfg);
  cfg.first_stream = 128;
  cfg.replicas = 129;
  const auto hi = hitting_times(m, specs, cfg);
  auto merged = lo.stats[0].values;
  merged.insert(merged.end(), hi.stats[0].values.begin(), hi.stats[0].values.end());
  CHECK(merged == a.stats[0].values);
}

TEST_CASE("fluid limit slope") {
  const auto m = builtin("reference");
  const auto est = fluid_limit_experiment(m, Axis::X, 4000, 200, 3);
  const double V1 = solve_chain(m, Axis::X).V;
  CHECK(std::abs(est.mean - V1) < 4 * est.stderr_);
  // Boundary law with the interior vertical marginal: slope tends to m2.
  const auto flat = QuadrantModel(
      1, m.interior(), {m.horizontal(0)},
      {StepDistribution::from_masses({{1, 0, 1.0 / 6}, {0, -1, 3.0 / 8}, {0, 0, 1.0 / 3}, {0, 1, 1.0 / 8}})},
      {m.corner(0, 0)});
  const auto e2 = fluid_limit_experiment(flat, Axis::X, 4000, 200, 3);
  CHECK(std::abs(e2.mean + 0.25) < 4 * e2.stderr_);
  // Deterministic upward kick: V = 1/14 from the chain closed form.
  const auto kick = QuadrantModel(1, m.interior(), {m.horizontal(0)},
                                  {StepDistribution::from_masses({{1, 2, 1.0}})}, {m.corner(0, 0)});
  const auto e3 = fluid_limit_experiment(kick, Axis::X, 4000, 200, 3);
  CHECK(e3.mean > 0.0);
  CHECK(std::abs(e3.mean - 1.0 / 14) < 4 * e3.stderr_);
}

TEST_CASE("transience probe") {
  const auto est = transience_probe(builtin("reference"), {1, 1}, 5000, 2000, 8);
  CHECK(est.ci_high < 1.0);
  CHECK(est.returned + est.censored == est.replicas);
  const auto rec = transience_probe(recurrent_model(), {1, 1}, 100000, 200, 8);
  CHECK(rec.p > 0.99);
}

TEST_CASE("wilson interval") {
  const auto [lo, hi] = wilson_interval(50, 100, 1.96);
  CHECK(lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.5962).epsilon(1e-3));
  CHECK(wilson_interval(0, 10, 2.0).first == 0.0);
}
