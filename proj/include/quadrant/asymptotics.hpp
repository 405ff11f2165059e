#pragma once

#include <string>
#include <vector>

#include "quadrant/chains.hpp"
#include "quadrant/green.hpp"
#include "quadrant/kernel.hpp"
#include "quadrant/model.hpp"

namespace quadrant {

/// Model-level quantities shared by all three checks.
struct AsymptoticInputs {
  KernelAnalysis kernel;
  ChainSolution x_chain;  // pi1, V1, A1
  ChainSolution y_chain;  // pi2, V2, A2

  /// pi1(i) (axis X) or pi2(j) (axis Y); past half the truncation the geometric tail is used.
  double pi(Axis axis, long k) const;
  double V(Axis axis) const { return axis == Axis::X ? x_chain.V : y_chain.V; }
  double A(Axis axis) const { return axis == Axis::X ? x_chain.tail.A() : y_chain.tail.A(); }
};

AsymptoticInputs prepare_asymptotics(const QuadrantModel& model, const KernelOptions& kernel = {},
                                     const StationaryOptions& chains = {});

/// Boundary asymptotics along one axis.
///
/// Axis::X: i fixed, j runs over [from, to], limit P(N1 < inf) pi1(i) / V1.
/// Axis::Y: j fixed, i runs, limit P(N2 < inf) pi2(j) / V2.
struct Thm1Report {
  Axis axis = Axis::X;
  State source;
  long fixed = 0;
  std::vector<long> index;
  std::vector<double> green;
  std::vector<double> residual;
  std::vector<double> gap;  // window truncation gap at each target
  double limit = 0.0;
  double escape = 0.0;
  double slope = 0.0;  // least-squares slope of log residual
  double decay = 0.0;  // head residual / tail residual
  bool pass = false;
};

/// Throws ResidualFloor when the residual reaches 10x the truncation gap before decaying 1e3.
Thm1Report verify_thm1(const GreenTable& table, const AsymptoticInputs& inputs,
                       const EscapeProbabilities& escape, Axis axis, long fixed, long from,
                       long to);

/// Lattice points (i, round(i tan gamma)) with s_min <= i + j <= s_max; gamma in [0, pi/2).
std::vector<State> ray_points(double gamma, long s_min, long s_max);

struct Thm2Report {
  double gamma = 0.0;
  State source;
  std::vector<State> targets;
  std::vector<double> green;
  std::vector<double> term1;  // P(N1 < inf) pi1(i) / V1
  std::vector<double> term2;  // P(N2 < inf) pi2(j) / V2
  std::vector<double> ratio;
  double max_deviation = 0.0;  // max |ratio - 1| over the outer third
  bool pass = false;
};

Thm2Report verify_thm2(const GreenTable& table, const AsymptoticInputs& inputs,
                       const EscapeProbabilities& escape, double gamma, long s_min, long s_max,
                       double threshold = 0.05);

/// g(source -> target) / g(ref -> target).
double martin_kernel(const GreenTable& source_table, const GreenTable& ref_table, State target);

enum class LimitKind { Below, Above, At };
const char* to_string(LimitKind k);

/// Limit Martin kernels k(source) in one direction.
///
/// Below and Above carry one value. At gamma0 the values are K(u) for the u listed, with
/// K(u) = (a_s u + b_s) / (a_r u + b_r), a = P(N1 < inf) A1 / V1, b = P(N2 < inf) A2 / V2.
struct MartinLimitSet {
  double gamma = 0.0;
  LimitKind kind = LimitKind::At;
  bool rational = false;
  long long m0 = 1;      // denominator of t0 when rational
  long long stride = 1;  // listed n are multiples of stride (at most 64 window + 1 points)
  std::string topology;
  std::vector<double> exponent;  // u = y1^exponent; n / m0 in the rational case
  std::vector<double> u;
  std::vector<double> values;
  double limit_low = 0.0;   // u -> 0, the gamma < gamma0 kernel
  double limit_high = 0.0;  // u -> inf, the gamma > gamma0 kernel
  bool monotone = false;
  bool bracketed = false;
};

struct EscapePair {
  EscapeProbabilities source;
  EscapeProbabilities ref;
};

MartinLimitSet directional_limit(const AsymptoticInputs& inputs, const EscapePair& escape,
                                 double gamma);

/// At gamma0: u = y1^{n / m0} for n in [-window, window] when t0 is classified rational, else a
/// log-uniform grid of 64 window + 1 points on [y1^{-window}, y1^{window}].
MartinLimitSet boundary_spectrum(const AsymptoticInputs& inputs, const EscapePair& escape,
                                 long window);

/// Observed Martin kernels along a ray against the directional limit.
struct MartinRayCheck {
  double gamma = 0.0;
  LimitKind kind = LimitKind::Above;
  std::vector<State> targets;
  std::vector<double> kernel;
  std::vector<double> predicted;  // constant off gamma0, K(y1^{j - i t0}) on it
  double max_rel_error = 0.0;  // outer third of the ray
  bool pass = false;
};

MartinRayCheck check_martin_ray(const GreenTable& source_table, const GreenTable& ref_table,
                                const AsymptoticInputs& inputs, const EscapePair& escape,
                                double gamma, long s_min, long s_max, double threshold = 0.02);

/// Everything the third theorem needs for one (source, ref) pair.
struct Thm3Report {
  State source, ref;
  MartinRayCheck above, below;
  MartinLimitSet spectrum;
  bool pass = false;
};

struct Thm3Options {
  double gamma_above = -1.0;  // default: halfway between gamma0 and pi/2
  double gamma_below = -1.0;  // default: gamma0 / 2
  long s_min = 20, s_max = 60;
  long spectrum_window = 6;
  double threshold = 0.02;
  GreenOptions green = [] {
    GreenOptions g;
    g.gap_tolerance = 1e-12;
    return g;
  }();
  EscapeOptions escape;
};

Thm3Report verify_thm3(const QuadrantModel& model, const AsymptoticInputs& inputs, State source,
                       State ref, const Thm3Options& options = {});

}  // namespace quadrant
