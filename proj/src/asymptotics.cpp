#include "quadrant/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "quadrant/error.hpp"

namespace quadrant {

namespace {

double log_slope(const std::vector<long>& x, const std::vector<double>& r) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(r[k] > 0.0)) continue;
    const double X = double(x[k]), Y = std::log(r[k]);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    n += 1;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void require_certified(const GreenTable& table, State t) {
  if (std::isinf(table.error_gap(t.i, t.j)))
    throw ValidationError("target (" + std::to_string(t.i) + "," + std::to_string(t.j) +
                          ") lies outside the certified window");
}

struct Coefficients {
  double a_s, b_s, a_r, b_r;
  double K(double u) const { return (a_s * u + b_s) / (a_r * u + b_r); }
};

Coefficients coefficients(const AsymptoticInputs& in, const EscapePair& e) {
  const double c1 = in.A(Axis::X) / in.V(Axis::X), c2 = in.A(Axis::Y) / in.V(Axis::Y);
  return {e.source.pN1 * c1, e.source.pN2 * c2, e.ref.pN1 * c1, e.ref.pN2 * c2};
}

}  // namespace

double AsymptoticInputs::pi(Axis axis, long k) const {
  const ChainSolution& c = axis == Axis::X ? x_chain : y_chain;
  if (k <= c.L / 2) return c.at(k);
  return c.tail.A() * std::pow(c.tail.root, -double(k));
}

AsymptoticInputs prepare_asymptotics(const QuadrantModel& model, const KernelOptions& kernel,
                                     const StationaryOptions& chains) {
  AsymptoticInputs in;
  in.kernel = analyze_kernel(model, kernel);
  in.x_chain = solve_chain(model, Axis::X, chains);
  in.y_chain = solve_chain(model, Axis::Y, chains);
  if (!(in.x_chain.V > 0.0 && in.y_chain.V > 0.0))
    throw ValidationError("asymptotics need V1 > 0 and V2 > 0");
  return in;
}

// ---------------------------------------------------------------------------

Thm1Report verify_thm1(const GreenTable& table, const AsymptoticInputs& inputs,
                       const EscapeProbabilities& escape, Axis axis, long fixed, long from,
                       long to) {
  if (from >= to) throw ValidationError("empty range");
  Thm1Report r;
  r.axis = axis;
  r.source = table.source;
  r.fixed = fixed;
  r.escape = axis == Axis::X ? escape.pN1 : escape.pN2;
  r.limit = r.escape * inputs.pi(axis, fixed) / inputs.V(axis);
  double floor = 0.0;
  for (long k = from; k <= to; ++k) {
    const State t = axis == Axis::X ? State{fixed, k} : State{k, fixed};
    require_certified(table, t);
    const double g = table.value(t.i, t.j);
    r.index.push_back(k);
    r.green.push_back(g);
    r.residual.push_back(std::abs(g - r.limit));
    r.gap.push_back(table.error_gap(t.i, t.j));
    floor = std::max(floor, r.gap.back());
  }
  r.slope = log_slope(r.index, r.residual);
  const double head = r.residual.front(), tail = r.residual.back();
  r.decay = tail > 0.0 ? head / tail : std::numeric_limits<double>::infinity();
  if (r.decay < 1e3 && tail <= 10.0 * floor)
    throw ResidualFloor("boundary residual reached the window truncation gap; grow the window");
  r.pass = r.slope < 0.0 && r.decay >= 1e3;
  return r;
}

std::vector<State> ray_points(double gamma, long s_min, long s_max) {
  if (!(gamma >= 0.0 && gamma < std::numbers::pi / 2)) throw ValidationError("gamma outside [0, pi/2)");
  const double t = std::tan(gamma);
  std::vector<State> out;
  for (long i = 0; i <= s_max; ++i) {
    const long j = std::lround(double(i) * t);
    if (i + j > s_max) break;
    if (i + j >= s_min) out.push_back({i, j});
  }
  return out;
}

Thm2Report verify_thm2(const GreenTable& table, const AsymptoticInputs& inputs,
                       const EscapeProbabilities& escape, double gamma, long s_min, long s_max,
                       double threshold) {
  Thm2Report r;
  r.gamma = gamma;
  r.source = table.source;
  r.targets = ray_points(gamma, s_min, s_max);
  if (r.targets.empty()) throw ValidationError("no lattice points on the ray in range");
  const double outer = double(s_min) + 2.0 * double(s_max - s_min) / 3.0;
  for (const auto& t : r.targets) {
    require_certified(table, t);
    const double g = table.value(t.i, t.j);
    const double t1 = escape.pN1 * inputs.pi(Axis::X, t.i) / inputs.V(Axis::X);
    const double t2 = escape.pN2 * inputs.pi(Axis::Y, t.j) / inputs.V(Axis::Y);
    r.green.push_back(g);
    r.term1.push_back(t1);
    r.term2.push_back(t2);
    r.ratio.push_back(g / (t1 + t2));
    if (double(t.i + t.j) >= outer) {
      if (table.error_gap(t.i, t.j) > 0.1 * threshold * g)
        throw ResidualFloor("Green values on the ray are not certified to the ratio tolerance");
      r.max_deviation = std::max(r.max_deviation, std::abs(r.ratio.back() - 1.0));
    }
  }
  r.pass = r.max_deviation < threshold;
  return r;
}

double martin_kernel(const GreenTable& source_table, const GreenTable& ref_table, State target) {
  const double d = ref_table.value(target.i, target.j);
  if (!(d > 0.0)) throw NumericError("reference Green value vanishes at the target");
  return source_table.value(target.i, target.j) / d;
}

const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::Below: return "below gamma0";
    case LimitKind::Above: return "above gamma0";
    default: return "at gamma0";
  }
}

MartinLimitSet boundary_spectrum(const AsymptoticInputs& inputs, const EscapePair& escape,
                                 long window) {
  if (window < 1) throw ValidationError("spectrum window must be positive");
  const auto c = coefficients(inputs, escape);
  MartinLimitSet s;
  s.gamma = inputs.kernel.gamma0;
  s.kind = LimitKind::At;
  s.rational = inputs.kernel.verdict.rational;
  s.limit_low = c.b_s / c.b_r;
  s.limit_high = c.a_s / c.a_r;
  const double y1 = inputs.kernel.y1;
  if (s.rational) {
    s.m0 = inputs.kernel.verdict.q;
    s.topology = "homeomorphic to Z";
    const long long span = window * s.m0;
    s.stride = std::max(1LL, (2 * span + 64 * window - 1) / (64 * window));
    for (long long n = -span - (-span) % s.stride; n <= span; n += s.stride)
      s.exponent.push_back(double(n) / double(s.m0));
  } else {
    s.topology = "dense in an interval, homeomorphic to R";
    const long points = 64 * window;
    for (long k = 0; k <= points; ++k)
      s.exponent.push_back(-double(window) + 2.0 * double(window) * double(k) / double(points));
  }
  for (double e : s.exponent) {
    s.u.push_back(std::pow(y1, e));
    s.values.push_back(c.K(s.u.back()));
  }
  const double lo = std::min(s.limit_low, s.limit_high), hi = std::max(s.limit_low, s.limit_high);
  s.bracketed = true;
  for (double v : s.values) s.bracketed = s.bracketed && v > lo && v < hi;
  const double dir = s.limit_high - s.limit_low;
  s.monotone = dir != 0.0;
  for (std::size_t k = 1; k < s.values.size(); ++k)
    s.monotone = s.monotone && (s.values[k] - s.values[k - 1]) * dir > 0.0;
  return s;
}

MartinLimitSet directional_limit(const AsymptoticInputs& inputs, const EscapePair& escape,
                                 double gamma) {
  const double g0 = inputs.kernel.gamma0;
  if (std::abs(gamma - g0) <= 1e-12) return boundary_spectrum(inputs, escape, 6);
  const auto c = coefficients(inputs, escape);
  MartinLimitSet s;
  s.gamma = gamma;
  s.kind = gamma > g0 ? LimitKind::Above : LimitKind::Below;
  s.rational = inputs.kernel.verdict.rational;
  s.topology = "single point";
  s.limit_low = c.b_s / c.b_r;
  s.limit_high = c.a_s / c.a_r;
  s.values = {s.kind == LimitKind::Above ? s.limit_high : s.limit_low};
  s.monotone = s.bracketed = true;
  return s;
}

MartinRayCheck check_martin_ray(const GreenTable& source_table, const GreenTable& ref_table,
                                const AsymptoticInputs& inputs, const EscapePair& escape,
                                double gamma, long s_min, long s_max, double threshold) {
  MartinRayCheck r;
  r.gamma = gamma;
  const double g0 = inputs.kernel.gamma0, t0 = inputs.kernel.t0;
  r.kind = std::abs(gamma - g0) <= 1e-12 ? LimitKind::At
           : gamma > g0                  ? LimitKind::Above
                                         : LimitKind::Below;
  const auto c = coefficients(inputs, escape);
  r.targets = ray_points(gamma, s_min, s_max);
  if (r.targets.empty()) throw ValidationError("no lattice points on the ray in range");
  const double outer = double(s_min) + 2.0 * double(s_max - s_min) / 3.0;
  for (const auto& t : r.targets) {
    require_certified(source_table, t);
    require_certified(ref_table, t);
    r.kernel.push_back(martin_kernel(source_table, ref_table, t));
    double p;
    if (r.kind == LimitKind::Above)
      p = c.a_s / c.a_r;
    else if (r.kind == LimitKind::Below)
      p = c.b_s / c.b_r;
    else
      p = c.K(std::pow(inputs.kernel.y1, double(t.j) - double(t.i) * t0));
    r.predicted.push_back(p);
    if (double(t.i + t.j) >= outer)
      r.max_rel_error = std::max(r.max_rel_error, std::abs(r.kernel.back() / p - 1.0));
  }
  r.pass = r.max_rel_error < threshold;
  return r;
}

Thm3Report verify_thm3(const QuadrantModel& model, const AsymptoticInputs& inputs, State source,
                       State ref, const Thm3Options& options) {
  const double g0 = inputs.kernel.gamma0;
  const double up = options.gamma_above > 0 ? options.gamma_above : 0.5 * (g0 + std::numbers::pi / 2);
  const double down = options.gamma_below > 0 ? options.gamma_below : 0.5 * g0;
  if (!(up > g0 && down < g0)) throw ValidationError("ray angles must straddle gamma0");
  std::set<State> pts;
  for (const auto& t : ray_points(up, options.s_min, options.s_max)) pts.insert(t);
  for (const auto& t : ray_points(down, options.s_min, options.s_max)) pts.insert(t);
  GreenOptions go = options.green;
  go.targets.insert(go.targets.end(), pts.begin(), pts.end());
  const auto src_table = green_exact(model, source, go);
  const auto ref_table = green_exact(model, ref, go);
  const auto esc = escape_exact(model, {source, ref}, inputs.kernel.t0, options.escape);
  const EscapePair pair{esc[0], esc[1]};
  Thm3Report r;
  r.source = source;
  r.ref = ref;
  r.above = check_martin_ray(src_table, ref_table, inputs, pair, up, options.s_min, options.s_max,
                             options.threshold);
  r.below = check_martin_ray(src_table, ref_table, inputs, pair, down, options.s_min,
                             options.s_max, options.threshold);
  r.spectrum = boundary_spectrum(inputs, pair, options.spectrum_window);
  r.pass = r.above.pass && r.below.pass && r.spectrum.monotone && r.spectrum.bracketed;
  return r;
}

}  // namespace quadrant
