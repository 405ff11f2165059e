#pragma once

#include <memory>
#include <string>
#include <vector>

#include "quadrant/model.hpp"

namespace quadrant {

/// Box [0, Lx] x [0, Ly]; the walk is killed when it leaves the box.
struct Window {
  long Lx = 0;
  long Ly = 0;

  long size() const { return (Lx + 1) * (Ly + 1); }
  long index(long i, long j) const { return i * (Ly + 1) + j; }
  bool contains(long i, long j) const { return i >= 0 && j >= 0 && i <= Lx && j <= Ly; }
};

/// Sparse LU of I - P restricted to a window.
class WindowSolver {
 public:
  WindowSolver(const QuadrantModel& model, Window window);
  ~WindowSolver();
  WindowSolver(WindowSolver&&) noexcept;
  WindowSolver& operator=(WindowSolver&&) noexcept;

  const Window& window() const { return window_; }
  /// g with g (I - P) = e_source: expected visits before leaving the window.
  std::vector<double> green_row(State source) const;
  /// h with (I - P) h = rhs.
  std::vector<double> harmonic(const std::vector<double>& rhs) const;

 private:
  struct Impl;
  Window window_;
  std::unique_ptr<Impl> impl_;
};

struct GreenOptions {
  long initial_window = 120;     // side of the inner window W
  double growth = 1.5;           // W grows by this factor when the gap is too wide
  long margin = 0;               // W+ = W + margin; 0 selects max(16, W/4)
  double gap_tolerance = 1e-8;   // required g_{W+} - g_W at the targets
  long max_states = 400'000;     // budget for the outer window
  std::vector<State> targets;    // empty: the source only
};

/// Green function from a fixed source on nested absorbing windows W inside W+.
/// Both are lower bounds increasing to g; error_gap = g_{W+} - g_W.
struct GreenTable {
  const QuadrantModel* model = nullptr;
  State source;
  Window inner;
  Window outer;
  std::vector<double> values;  // on the outer window
  std::vector<double> gap;     // on the inner window
  double balance_residual = 0.0;
  int growth_steps = 0;

  /// Outer-window value; 0 outside.
  double value(long i, long j) const;
  /// Bracketing width; +inf outside the inner window.
  double error_gap(long i, long j) const;
  /// Largest index usable along each axis for series (inner side).
  long certified_extent() const { return std::min(inner.Lx, inner.Ly); }
};

GreenTable green_exact(const QuadrantModel& model, State source, const GreenOptions& options = {});

struct McGreenEstimate {
  State target;
  double mean = 0.0;
  double stderr_ = 0.0;
  double censor_bound = 0.0;  // mean visits in the last half of the run
  double half_width = 0.0;    // 99% CLT half width plus censor_bound
};

/// Mean number of visits to each target over max_steps steps, replica r on stream 4 r.
std::vector<McGreenEstimate> green_mc(const QuadrantModel& model, State source,
                                      const std::vector<State>& targets, long max_steps, long reps,
                                      std::uint64_t seed, unsigned workers = 0);

struct EscapeOptions {
  long initial_window = 100;
  double growth = 1.25;
  double tolerance = 1e-6;       // change of every requested value under growth
  long max_states = 400'000;
};

/// P(N1 < inf): the walk eventually leaves the horizontal strip {j < k0} for good (escape
/// along the vertical axis). P(N2 < inf): the same for the vertical strip.
struct EscapeProbabilities {
  State source;
  double pN1 = 0.0;
  double pN2 = 0.0;
  double change = 0.0;  // largest change between the last two windows
  std::string method;
  double ci_low1 = 0.0, ci_high1 = 1.0;  // Monte Carlo only, for pN1

  double sum() const { return pN1 + pN2; }
};

/// Harmonic solve with exits above the ray j = t0 i scored for N1, below for N2 (on the ray:
/// half each). Windows grow until every source is stable within the tolerance.
std::vector<EscapeProbabilities> escape_exact(const QuadrantModel& model,
                                              const std::vector<State>& sources, double t0,
                                              const EscapeOptions& options = {});

/// Classify the position after max_steps by the same ray rule.
EscapeProbabilities escape_mc(const QuadrantModel& model, State source, double t0,
                              long max_steps, long reps, std::uint64_t seed, unsigned workers = 0);

/// Series of eq. G, g_l, g~_k, f built from a Green table by Horner summation up to
/// imax and completed past imax with the last coefficient (the coefficients converge
/// geometrically to their axis limits).
class GeneratingFunctions {
 public:
  GeneratingFunctions(const QuadrantModel& model, const GreenTable& table, long imax = -1);

  long imax() const { return imax_; }
  Complex g_l(int l, Complex x) const;
  Complex gt_k(int k, Complex y) const;
  Complex f(Complex x, Complex y) const;
  Complex G(Complex x, Complex y) const;
  /// sum_l q'_l g_l + sum_k q''_k g~_k + f.
  Complex numerator(Complex x, Complex y) const;
  /// -Q G - numerator.
  Complex functional_residual(Complex x, Complex y) const;
  /// Coarse bound on the series error at |x|, |y| <= radius.
  double error_estimate(double radius) const;

 private:
  const QuadrantModel* model_;
  const GreenTable* table_;
  long imax_;
  std::vector<std::vector<double>> gl_, gt_;  // coefficients n = 0 .. imax - k0
  std::vector<std::vector<double>> G_;        // [i - k0][j - k0]
};

/// Trapezoidal double quadrature of -numerator / Q over |x| = |y| = 1 - eps with
/// quad_n nodes per circle; value(i, j) extracts g((i0,j0) -> (i,j)) for i, j >= k0.
class ContourOracle {
 public:
  ContourOracle(const QuadrantModel& model, const GeneratingFunctions& gens, double eps,
                int quad_n, unsigned workers = 0);

  /// Throws QuadratureUnstable when the imaginary part exceeds 1e-8.
  double value(long i, long j) const;
  double imaginary(long i, long j) const;
  double min_abs_Q() const { return min_abs_Q_; }
  /// Raw quadrature sum, no stability check.
  Complex coefficient(long i, long j) const;

 private:
  int k0_;
  int n_;
  double r_;
  std::vector<Complex> grid_;  // G at (x_a, y_b), row-major in a
  double min_abs_Q_ = 0.0;
};

double contour_green_oracle(const QuadrantModel& model, const GeneratingFunctions& gens,
                            State target, double eps, int quad_n);

}  // namespace quadrant
