#pragma once

#include <vector>

#include "quadrant/model.hpp"

namespace quadrant {

struct StationaryOptions {
  long initial_states = 64;  // first truncation L
  double tolerance = 1e-13;  // head-mass change that stops the doubling
  long max_states = 1'000'000;
};

/// Geometric tail pi(i) ~ A * root^{-i}.
struct TailEstimate {
  double root = 0.0;        // x1 for axis X, y1 for axis Y
  double slope = 0.0;       // least-squares slope of log pi(i) over the fit window
  double r_squared = 0.0;
  double A_fit = 0.0;       // mean of pi(i) root^i over the fit window
  double A_closed = 0.0;    // kernel closed form from the head masses
  double quality = 0.0;     // |A_fit - A_closed| / A_closed
  long lo = 0, hi = 0;      // fit window, inclusive

  /// Closed form when the two estimates agree within 1%, else the fit.
  double A() const { return quality <= 0.01 ? A_closed : A_fit; }
  bool consistent() const { return quality <= 0.01; }
};

struct ChainSolution {
  Axis axis = Axis::X;
  std::vector<double> pi;   // states 0..L
  long L = 0;
  double tail_bound = 0.0;  // estimate of the mass the truncation misplaces
  double residual = 0.0;    // || pi P - pi ||_1 on the truncated chain
  int doublings = 0;
  double V = 0.0;
  TailEstimate tail;

  double at(long k) const { return k >= 0 && k < long(pi.size()) ? pi[k] : 0.0; }
};

/// Stationary law of the chain truncated to {0..L}, overflow folded into L, by
/// subtraction-free (GTH) banded elimination. L doubles until pi(0..k0-1) settles.
ChainSolution stationary(const InducedChain& chain, const StationaryOptions& options = {});

/// Fluid-limit speed: sum_k pi(k) * (mean step of the other coordinate from column k).
double speed(const QuadrantModel& model, Axis axis, const ChainSolution& solution);

/// Tail fit on [lo, hi] (default [L/2, 3L/4]) and the closed-form constant.
TailEstimate tail_constant(const QuadrantModel& model, const ChainSolution& solution, double root,
                           long lo = -1, long hi = -1);

/// stationary + speed + tail_constant for one axis.
ChainSolution solve_chain(const QuadrantModel& model, Axis axis,
                          const StationaryOptions& options = {});

/// Append the speed assumptions "assumption: V1 > 0" and "assumption: V2 > 0".
void check_speeds(const QuadrantModel& model, ModelReport& report,
                  const StationaryOptions& options = {});

}  // namespace quadrant
