#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "quadrant/chains.hpp"
#include "quadrant/error.hpp"
#include "quadrant/green.hpp"
#include "quadrant/kernel.hpp"
#include "quadrant/simulate.hpp"
#include "support.hpp"

using namespace quadrant;
using testing_support::builtin;

namespace {

const QuadrantModel& reference() {
  static const QuadrantModel m = builtin("reference");
  return m;
}

const GreenTable& reference_table() {
  static const GreenTable t = [] {
    GreenOptions o;
    o.targets = {{1, 40}, {12, 4}};
    return green_exact(reference(), {0, 0}, o);
  }();
  return t;
}

// Dense oracle: expected visits before leaving the box, via (I - P^T) g = e.
Eigen::VectorXd dense_green(const QuadrantModel& m, long L, State s) {
  const long n = (L + 1) * (L + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (long i = 0; i <= L; ++i)
    for (long j = 0; j <= L; ++j)
      for (const auto& e : m.at(i, j).entries()) {
        const long a = i + e.step.di, b = j + e.step.dj;
        if (a <= L && b <= L) A(a * (L + 1) + b, i * (L + 1) + j) -= e.p;
      }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(s.i * (L + 1) + s.j) = 1.0;
  return A.partialPivLu().solve(rhs);
}

}  // namespace

TEST_CASE("window solver matches a dense solve") {
  const auto& m = reference();
  const long L = 14;
  const auto g = WindowSolver(m, {L, L}).green_row({2, 3});
  const auto d = dense_green(m, L, {2, 3});
  for (long k = 0; k < d.size(); ++k) CHECK(g[k] == doctest::Approx(d(k)).epsilon(1e-11));
}

TEST_CASE("green table balance, diagonal and gap") {
  const auto& t = reference_table();
  CHECK(t.balance_residual < 1e-9);
  CHECK(t.value(0, 0) >= 1.0);
  for (long i = 0; i <= t.inner.Lx; i += 7)
    for (long j = 0; j <= t.inner.Ly; j += 7) {
      CHECK(t.error_gap(i, j) >= -1e-14);
      CHECK(t.value(i, j) >= 0.0);
    }
  CHECK(t.error_gap(1, 40) < 1e-8);
  CHECK(std::isinf(t.error_gap(t.inner.Lx + 1, 0)));
}

TEST_CASE("gap shrinks as the window grows") {
  const auto& m = reference();
  double last = 1e9;
  for (long L : {40L, 80L, 160L}) {
    const auto a = WindowSolver(m, {L, L}).green_row({0, 0});
    const auto b = WindowSolver(m, {L + 20, L + 20}).green_row({0, 0});
    const double gap = b[Window{L + 20, L + 20}.index(3, 3)] - a[Window{L, L}.index(3, 3)];
    CHECK(gap >= 0.0);
    CHECK(gap < last);
    last = gap;
  }
}

TEST_CASE("diagonal value agrees with the return probability") {
  const auto& t = reference_table();
  const double p_exact = 1.0 - 1.0 / t.value(0, 0);
  const auto est = transience_probe(reference(), {0, 0}, 20000, 4000, 11);
  CHECK(p_exact >= est.ci_low);
  CHECK(p_exact <= est.ci_high + double(est.censored) / double(est.replicas));
}

TEST_CASE("monte carlo green function covers the exact values") {
  const auto& t = reference_table();
  const std::vector<State> targets{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 3},
                                   {3, 2}, {5, 5}, {4, 0}, {0, 4}, {6, 2}};
  const auto mc = green_mc(reference(), {0, 0}, targets, 6000, 3000, 5);
  int covered = 0;
  for (const auto& e : mc)
    if (std::abs(e.mean - t.value(e.target.i, e.target.j)) <= e.half_width) ++covered;
  CHECK(covered >= 9);
}

TEST_CASE("monte carlo green function: unreachable target and replica scaling") {
  // Up/right walk: (1, 1) is behind the source.
  const QuadrantModel up(1, StepDistribution::from_masses({{1, 0, 0.5}, {0, 1, 0.5}}),
                         {StepDistribution::from_masses({{1, 0, 0.5}, {0, 1, 0.5}})},
                         {StepDistribution::from_masses({{1, 0, 0.5}, {0, 1, 0.5}})},
                         {StepDistribution::from_masses({{1, 0, 0.5}, {0, 1, 0.5}})});
  const auto zero = green_mc(up, {3, 3}, {{1, 1}}, 100, 50, 1);
  CHECK(zero[0].mean == 0.0);
  CHECK(zero[0].half_width == 0.0);

  const auto a = green_mc(reference(), {0, 0}, {{1, 1}}, 2000, 1000, 2);
  const auto b = green_mc(reference(), {0, 0}, {{1, 1}}, 2000, 4000, 3);
  CHECK(b[0].stderr_ / a[0].stderr_ == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("escape probabilities on the reference model") {
  const auto& m = reference();
  const auto ka = analyze_kernel(m);
  const auto e = escape_exact(m, {{0, 0}, {20, 0}, {60, 0}, {0, 60}}, ka.t0);
  for (const auto& p : e) {
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.change < 1e-6);
  }
  CHECK(e[0].pN1 == doctest::Approx(0.38791924).epsilon(1e-6));
  // Far along the x-axis the walk stays near it.
  CHECK(e[1].pN2 < e[2].pN2);
  CHECK(e[2].pN2 > 0.95);
  CHECK(e[3].pN1 > 0.95);

  const auto mc = escape_mc(m, {0, 0}, ka.t0, 4000, 4000, 9);
  CHECK(e[0].pN1 >= mc.ci_low1 - 0.01);
  CHECK(e[0].pN1 <= mc.ci_high1 + 0.01);
}

TEST_CASE("escape probabilities are symmetric on a mirrored model") {
  const auto m = builtin("symmetric");
  REQUIRE(m.hash() == m.transposed().hash());
  const auto e = escape_exact(m, {{0, 0}, {5, 5}, {3, 7}, {7, 3}}, 1.0);
  CHECK(e[0].pN1 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(e[1].pN1 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(e[2].pN1 == doctest::Approx(e[3].pN2).epsilon(1e-6));
}

TEST_CASE("generating functions reproduce the table") {
  const auto& t = reference_table();
  const GeneratingFunctions gf(reference(), t);
  CHECK(gf.g_l(0, 0.0).real() == doctest::Approx(t.value(1, 0)).epsilon(1e-14));
  CHECK(gf.gt_k(0, 0.0).real() == doctest::Approx(t.value(0, 1)).epsilon(1e-14));
  CHECK(gf.G(0.0, 0.0).real() == doctest::Approx(t.value(1, 1)).epsilon(1e-14));
  // Derivative at 0 via a small circle.
  const double h = 1e-4;
  const Complex d = (gf.g_l(0, h) - gf.g_l(0, -h)) / (2 * h);
  CHECK(d.real() == doctest::Approx(t.value(2, 0)).epsilon(1e-6));
}

TEST_CASE("functional equation holds on the bidisk") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto point = [&] { return std::polar(0.9 * std::sqrt(U(rng)), 2 * M_PI * U(rng)); };
  {
    const GeneratingFunctions gf(reference(), reference_table());
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) worst = std::max(worst, std::abs(gf.functional_residual(point(), point())));
    CHECK(worst < 1e-6);
  }
  {
    const auto m = testing_support::wide_model();
    const auto t = green_exact(m, {1, 3});
    const GeneratingFunctions gf(m, t);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) worst = std::max(worst, std::abs(gf.functional_residual(point(), point())));
    CHECK(worst < 1e-6);
    const ContourOracle co(m, gf, 0.1, 128);
    for (State s : {State{2, 2}, State{4, 5}, State{3, 9}})
      CHECK(co.value(s.i, s.j) == doctest::Approx(t.value(s.i, s.j)).epsilon(1e-6));
  }
}

TEST_CASE("contour oracle recovers the green function") {
  const auto& t = reference_table();
  const GeneratingFunctions gf(reference(), t);
  const ContourOracle co(reference(), gf, 0.1, 256);
  CHECK(co.min_abs_Q() > 0.0);
  const std::vector<State> targets{{1, 1}, {2, 3}, {3, 2}, {5, 5}, {4, 7},
                                   {8, 3}, {10, 10}, {6, 1}, {1, 6}, {12, 4}};
  for (const auto& s : targets) {
    const double exact = t.value(s.i, s.j);
    CHECK(std::abs(co.value(s.i, s.j) - exact) / exact < 1e-6);
    CHECK(std::abs(co.imaginary(s.i, s.j)) < 1e-8);
  }
  CHECK(contour_green_oracle(reference(), gf, {5, 5}, 0.1, 256) ==
        doctest::Approx(t.value(5, 5)).epsilon(1e-6));
}

TEST_CASE("contour quadrature converges spectrally") {
  const auto& t = reference_table();
  const GeneratingFunctions gf(reference(), t);
  std::vector<double> err;
  for (int n : {32, 64, 128}) {
    const ContourOracle co(reference(), gf, 0.1, n);
    err.push_back(std::abs(co.coefficient(4, 7).real() - t.value(4, 7)));
  }
  CHECK(err[1] < err[0] / 10);
  CHECK(err[2] < err[1] / 10 + 1e-12);
}

TEST_CASE("invalid inputs") {
  const auto& t = reference_table();
  const GeneratingFunctions gf(reference(), t);
  CHECK_THROWS_AS(ContourOracle(reference(), gf, 1.5, 64), ValidationError);
  GreenOptions tiny;
  tiny.max_states = 100;
  CHECK_THROWS_AS(green_exact(reference(), {0, 0}, tiny), WindowExplosion);
}
