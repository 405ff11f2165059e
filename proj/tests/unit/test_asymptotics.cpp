#include <doctest.h>

#include <cmath>
#include <numbers>

#include "quadrant/asymptotics.hpp"
#include "quadrant/error.hpp"
#include "support.hpp"

using namespace quadrant;
using testing_support::builtin;

namespace {

struct Fixture {
  QuadrantModel model;
  AsymptoticInputs in;
  GreenTable table;
  EscapeProbabilities escape;
};

Fixture make(const std::string& name, std::vector<State> extra = {}) {
  Fixture f{builtin(name), {}, {}, {}};
  f.in = prepare_asymptotics(f.model);
  GreenOptions go;
  go.gap_tolerance = 1e-12;
  for (long k = 10; k <= 40; ++k) {
    go.targets.push_back({1, k});
    go.targets.push_back({k, 1});
  }
  for (const auto& s : ray_points(f.in.kernel.gamma0, 20, 60)) go.targets.push_back(s);
  go.targets.insert(go.targets.end(), extra.begin(), extra.end());
  f.table = green_exact(f.model, {0, 0}, go);
  f.escape = escape_exact(f.model, {{0, 0}}, f.in.kernel.t0)[0];
  return f;
}

const Fixture& reference() {
  static const Fixture f = make("reference", ray_points(80.0 * std::numbers::pi / 180, 20, 50));
  return f;
}

}  // namespace

TEST_CASE("boundary asymptotics on the reference model") {
  const auto& f = reference();
  const auto r = verify_thm1(f.table, f.in, f.escape, Axis::X, 1, 10, 40);
  CHECK(r.pass);
  CHECK(r.slope < 0.0);
  CHECK(r.decay >= 1e3);
  // P(N1 < inf) pi1(1) / V1 with pi1(1) = 0.3 and V1 = 1/4.
  CHECK(r.limit == doctest::Approx(0.38791924 * 0.3 / 0.25).epsilon(1e-7));
  const auto y = verify_thm1(f.table, f.in, f.escape, Axis::Y, 1, 10, 40);
  CHECK(y.pass);
  CHECK(y.limit == doctest::Approx(f.escape.pN2 * (1.0 / 3.0) / (5.0 / 12.0)).epsilon(1e-9));
}

TEST_CASE("boundary asymptotics are mirror images on the symmetric model") {
  const auto f = make("symmetric");
  const auto x = verify_thm1(f.table, f.in, f.escape, Axis::X, 1, 10, 40);
  const auto y = verify_thm1(f.table, f.in, f.escape, Axis::Y, 1, 10, 40);
  CHECK(x.limit == doctest::Approx(y.limit).epsilon(1e-9));
  for (std::size_t k = 0; k < x.residual.size(); ++k)
    CHECK(std::abs(x.residual[k] - y.residual[k]) <= 1e-9 * x.green[k]);
  CHECK(x.pass == y.pass);
}

TEST_CASE("boundary check refuses a window that is too small") {
  const auto& f = reference();
  GreenOptions go;
  go.initial_window = 45;
  go.margin = 5;
  go.gap_tolerance = 1.0;
  const auto small = green_exact(f.model, {0, 0}, go);
  CHECK_THROWS_AS(verify_thm1(small, f.in, f.escape, Axis::X, 1, 10, 40), ResidualFloor);
  CHECK_THROWS_AS(verify_thm1(small, f.in, f.escape, Axis::X, 1, 10, 60), ValidationError);
}

TEST_CASE("ray points") {
  const auto flat = ray_points(0.0, 5, 9);
  REQUIRE(flat.size() == 5);
  CHECK(flat.front().i == 5);
  CHECK(flat.back().j == 0);
  const auto diag = ray_points(std::numbers::pi / 4, 10, 20);
  for (const auto& s : diag) CHECK(s.i == s.j);
  CHECK_THROWS_AS(ray_points(2.0, 1, 5), ValidationError);
}

TEST_CASE("interior asymptotics along several rays") {
  const auto& f = reference();
  const auto at = verify_thm2(f.table, f.in, f.escape, f.in.kernel.gamma0, 20, 60);
  CHECK(at.pass);
  CHECK(at.max_deviation < 0.05);
  const auto steep = verify_thm2(f.table, f.in, f.escape, 80.0 * std::numbers::pi / 180, 20, 50);
  CHECK(steep.pass);
  CHECK(steep.term1.back() > 100 * steep.term2.back());
  // The horizontal ray is the second boundary display.
  const auto flat = verify_thm2(f.table, f.in, f.escape, 0.0, 10, 40);
  const auto y = verify_thm1(f.table, f.in, f.escape, Axis::Y, 0, 10, 40);
  CHECK(flat.pass);
  for (std::size_t k = 0; k < flat.targets.size(); ++k)
    CHECK(flat.term2[k] == doctest::Approx(y.limit).epsilon(1e-12));
}

TEST_CASE("martin kernel with the reference source is identically one") {
  const auto& f = reference();
  for (long i = 0; i <= 30; i += 3)
    for (long j = 0; j <= 30; j += 5) CHECK(martin_kernel(f.table, f.table, {i, j}) == 1.0);
}

TEST_CASE("directional limits are escape-probability ratios") {
  const auto& f = reference();
  const auto esc = escape_exact(f.model, {{4, 1}, {0, 0}}, f.in.kernel.t0);
  const EscapePair pair{esc[0], esc[1]};
  const auto up = directional_limit(f.in, pair, 1.3);
  const auto down = directional_limit(f.in, pair, 0.2);
  CHECK(up.kind == LimitKind::Above);
  CHECK(down.kind == LimitKind::Below);
  CHECK(up.values[0] == doctest::Approx(esc[0].pN1 / esc[1].pN1).epsilon(1e-12));
  CHECK(down.values[0] == doctest::Approx(esc[0].pN2 / esc[1].pN2).epsilon(1e-12));
  CHECK(directional_limit(f.in, pair, f.in.kernel.gamma0).kind == LimitKind::At);
}

TEST_CASE("spectrum on the symmetric model sits at integer powers of y1") {
  const auto f = make("symmetric");
  const auto esc = escape_exact(f.model, {{3, 0}, {0, 0}}, 1.0);
  const auto s = boundary_spectrum(f.in, {esc[0], esc[1]}, 5);
  CHECK(s.rational);
  CHECK(s.m0 == 1);
  CHECK(s.topology == "homeomorphic to Z");
  REQUIRE(s.u.size() == 11);
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    CHECK(s.exponent[k] == double(long(k) - 5));
    CHECK(s.u[k] == doctest::Approx(std::pow(3.0, s.exponent[k])).epsilon(1e-9));
  }
  CHECK(s.monotone);
  CHECK(s.bracketed);
  // Endpoints approach the directional limits.
  CHECK(std::abs(s.values.back() - s.limit_high) < std::abs(s.values[s.values.size() - 2] - s.limit_high));
}

TEST_CASE("spectrum for an irrational verdict is a dense grid") {
  const auto& f = reference();
  auto in = f.in;
  in.kernel.verdict = classify_t0(in.kernel.t0, 1'000'000, 1e-14);
  REQUIRE_FALSE(in.kernel.verdict.rational);
  const auto esc = escape_exact(f.model, {{2, 5}, {0, 0}}, in.kernel.t0);
  const auto s = boundary_spectrum(in, {esc[0], esc[1]}, 4);
  CHECK(s.topology == "dense in an interval, homeomorphic to R");
  CHECK(s.u.size() == 257);
  CHECK(s.monotone);
  CHECK(s.bracketed);
  // Monotone direction follows the sign of a_s b_r - a_r b_s.
  CHECK((s.values.back() > s.values.front()) == (s.limit_high > s.limit_low));
}

TEST_CASE("rational spectrum with a large denominator is thinned") {
  const auto& f = reference();
  REQUIRE(f.in.kernel.verdict.rational);
  const auto esc = escape_exact(f.model, {{2, 5}, {0, 0}}, f.in.kernel.t0);
  const auto s = boundary_spectrum(f.in, {esc[0], esc[1]}, 4);
  CHECK(s.u.size() <= 257);
  CHECK(s.stride > 1);
  CHECK(s.monotone);
}

TEST_CASE("spectrum degenerates when source and reference coincide") {
  const auto& f = reference();
  const auto s = boundary_spectrum(f.in, {f.escape, f.escape}, 3);
  for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(s.monotone);
}

TEST_CASE("martin boundary regimes on the reference model") {
  const auto& f = reference();
  const auto r = verify_thm3(f.model, f.in, {3, 2}, {0, 0});
  CHECK(r.above.pass);
  CHECK(r.below.pass);
  CHECK(r.above.max_rel_error < 0.02);
  CHECK(r.below.max_rel_error < 0.02);
  CHECK(r.spectrum.monotone);
  CHECK(r.spectrum.bracketed);
  CHECK(r.pass);
}
