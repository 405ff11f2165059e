#include "quadrant/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "quadrant/error.hpp"
#include "quadrant/parallel.hpp"

namespace quadrant {

namespace {

Complex ipow(Complex z, int n) {
  if (n < 0) return 1.0 / ipow(z, -n);
  Complex r = 1.0;
  while (n > 0) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

// x^ex y^ey (dist(x,y) - 1); every exponent is nonnegative for a floor-respecting law.
Complex shifted_kernel(const StepDistribution& dist, int ex, int ey, Complex x, Complex y) {
  Complex s = -ipow(x, ex) * ipow(y, ey);
  for (const auto& e : dist.entries()) s += e.p * ipow(x, e.step.di + ex) * ipow(y, e.step.dj + ey);
  return s;
}

// Sum of the magnitudes of the terms, used to scale residuals.
double kernel_scale(const StepDistribution& dist, int ex, int ey, Complex x, Complex y) {
  double s = std::abs(ipow(x, ex) * ipow(y, ey));
  for (const auto& e : dist.entries())
    s += e.p * std::abs(ipow(x, e.step.di + ex) * ipow(y, e.step.dj + ey));
  return s;
}

// Minimizer of a convex Laurent polynomial with positive and negative powers on (0, inf).
double convex_minimizer(const JumpLaw& law) {
  auto d = [&](double y) { return law.symbol_derivative(y); };
  double lo = 1.0, hi = 1.0;
  if (d(1.0) < 0.0) {
    hi = 2.0;
    for (int k = 0; d(hi) < 0.0; ++k) {
      if (k > 200) throw NoSecondRoot("symbol has no minimizer on (0, inf)");
      lo = hi;
      hi *= 2.0;
    }
  } else {
    lo = 0.5;
    for (int k = 0; d(lo) > 0.0; ++k) {
      if (k > 200) throw NoSecondRoot("symbol has no minimizer on (0, inf)");
      hi = lo;
      lo *= 0.5;
    }
  }
  for (int k = 0; k < 300 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (d(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Root of law(y) = 1 on [lo, hi] where law(lo) < 1 < law(hi) (increasing) or the reverse.
double bisect_level(const JumpLaw& law, double lo, double hi) {
  const bool increasing = law.symbol(lo) < 1.0;
  for (int k = 0; k < 400; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const bool below = law.symbol(mid) < 1.0;
    ((below == increasing) ? lo : hi) = mid;
  }
  double y = std::abs(law.symbol(lo) - 1.0) <= std::abs(law.symbol(hi) - 1.0) ? lo : hi;
  // Newton polish, kept inside the bracket.
  for (int k = 0; k < 3; ++k) {
    const double dy = (law.symbol(y) - 1.0) / law.symbol_derivative(y);
    const double next = y - dy;
    if (!(next >= std::min(lo, hi) - 1e-15 * y && next <= std::max(lo, hi) + 1e-15 * y)) break;
    y = next;
  }
  return y;
}

// Larger root of law(y) = 1 given the minimizer tau with law(tau) < 1.
double upper_root(const JumpLaw& law, double tau, double span, double min_mass) {
  double ymax = 1.0 + 2.0 * span / min_mass;
  while (ymax <= tau) ymax *= 2.0;
  for (int k = 0; law.symbol(ymax) <= 1.0; ++k) {
    if (k > 60) throw NoSecondRoot("P(y) = 1 has no root above the structural constant");
    ymax *= 2.0;
  }
  return bisect_level(law, tau, ymax);
}

double law_min_mass(const JumpLaw& law) {
  double m = std::numeric_limits<double>::infinity();
  for (auto [d, p] : law.jumps)
    if (p > 0.0) m = std::min(m, p);
  return m;
}

// P_eps(y) = sum_j (sum_i mu(i,j) (1+eps)^i) y^j.
JumpLaw tilted_law(const StepDistribution& dist, double x) {
  std::map<int, double> acc;
  for (const auto& e : dist.entries()) acc[e.step.dj] += e.p * std::pow(x, e.step.di);
  JumpLaw law;
  for (auto [d, p] : acc)
    if (p > 0.0) law.jumps.emplace_back(d, p);
  return law;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernel

Complex Kernel::Q(Complex x, Complex y) const {
  const int k0 = model_->k0();
  return shifted_kernel(model_->interior(), k0, k0, x, y);
}

std::pair<Complex, Complex> Kernel::Q_gradient(Complex x, Complex y) const {
  const int k0 = model_->k0();
  Complex gx = -double(k0) * ipow(x, k0 - 1) * ipow(y, k0);
  Complex gy = -double(k0) * ipow(x, k0) * ipow(y, k0 - 1);
  for (const auto& e : model_->interior().entries()) {
    const int ex = e.step.di + k0, ey = e.step.dj + k0;
    if (ex != 0) gx += e.p * double(ex) * ipow(x, ex - 1) * ipow(y, ey);
    if (ey != 0) gy += e.p * double(ey) * ipow(x, ex) * ipow(y, ey - 1);
  }
  return {gx, gy};
}

Complex Kernel::q_horizontal(int l, Complex x, Complex y) const {
  return shifted_kernel(model_->horizontal(l), model_->k0(), l, x, y);
}

Complex Kernel::q_vertical(int k, Complex x, Complex y) const {
  return shifted_kernel(model_->vertical(k), k, model_->k0(), x, y);
}

Complex Kernel::q_corner(int k, int l, Complex x, Complex y) const {
  return shifted_kernel(model_->corner(k, l), k, l, x, y);
}

// ---------------------------------------------------------------------------
// Roots and branches

double one_d_root(const QuadrantModel& model, Axis axis) {
  const JumpLaw law = model.interior().marginal(axis);
  if (!(law.mean() < 0.0))
    throw ValidationError(std::string("drift along ") + to_string(axis) + " is not negative");
  if (law.max_jump() <= 0)
    throw NoSecondRoot(std::string("no upward mass along ") + to_string(axis) +
                       ": P never re-crosses 1");
  const double tau = convex_minimizer(law);
  const double root =
      upper_root(law, tau, double(law.max_jump() - law.min_jump()), law_min_mass(law));
  if (std::abs(law.symbol(root) - 1.0) > 1e-12)
    throw NotConverged("one-dimensional root residual above 1e-12");
  return root;
}

Complex branch_Y0(const QuadrantModel& model, Complex x, int segments) {
  if (x == Complex(1.0)) return 1.0;
  const Kernel K(model);
  const int k0 = model.k0();
  Complex y = 1.0, xs = 1.0;
  for (int s = 1; s <= segments; ++s) {
    const Complex xn = 1.0 + (x - 1.0) * (double(s) / segments);
    auto [gx, gy] = K.Q_gradient(xs, y);
    if (std::abs(gy) < 1e-14) throw BranchLoss("dQ/dy vanishes along the continuation path");
    const Complex pred = y - gx / gy * (xn - xs);
    Complex z = pred;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const Complex dy = K.Q(xn, z) / K.Q_gradient(xn, z).second;
      z -= dy;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
      if (std::abs(dy) <= 1e-13 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw BranchLoss("Newton continuation did not converge; shrink |x - 1|");
    if (std::abs(z - pred) > 0.05 * std::max(1.0, std::abs(y)))
      throw BranchLoss("Newton continuation jumped branches; shrink |x - 1|");
    y = z;
    xs = xn;
  }
  const double scale = kernel_scale(model.interior(), k0, k0, x, y);
  if (std::abs(K.Q(x, y)) > 1e-12 * std::max(1.0, scale))
    throw BranchLoss("branch residual above 1e-12");
  return y;
}

double branch_radius(const QuadrantModel& model) {
  for (double delta = 0.5; delta >= 1e-6; delta *= 0.5) {
    bool ok = true;
    for (int k = 0; k < 16 && ok; ++k) {
      const Complex x = 1.0 + std::polar(delta, 2.0 * std::numbers::pi * k / 16.0);
      try {
        const Complex a = branch_Y0(model, x, 32), b = branch_Y0(model, x, 64);
        ok = std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a));
      } catch (const BranchLoss&) {
        ok = false;
      }
    }
    if (ok) return delta;
  }
  throw BranchLoss("no continuation radius above 1e-6");
}

double branch_Y1(const QuadrantModel& model, double eps) {
  const JumpLaw law = tilted_law(model.interior(), 1.0 + eps);
  if (law.max_jump() <= 0 || law.min_jump() >= 0)
    throw NoSecondRoot("Q(1 + eps, y) has fewer than two positive zeros");
  const double tau = convex_minimizer(law);
  if (!(law.symbol(tau) < 1.0))
    throw NoSecondRoot("Q(1 + eps, y) has fewer than two positive zeros; decrease eps");
  return upper_root(law, tau, double(law.max_jump() - law.min_jump()), law_min_mass(law));
}

BranchDerivatives derivatives_at_one(const QuadrantModel& model) {
  double ex = 0, ey = 0, exx = 0, eyy = 0, exy = 0;
  for (const auto& e : model.interior().entries()) {
    const double di = e.step.di, dj = e.step.dj;
    ex += e.p * di;
    ey += e.p * dj;
    exx += e.p * di * di;
    eyy += e.p * dj * dj;
    exy += e.p * di * dj;
  }
  if (ey == 0.0) throw ValidationError("vertical drift is zero; Y0 derivatives undefined");
  BranchDerivatives d;
  d.a = -ex / ey;
  d.bb = (ex * ex * ey - ex * ex * eyy + 2.0 * ex * exy * ey + ex * ey * ey - exx * ey * ey) /
         (ey * ey * ey);
  return d;
}

BranchDerivatives derivatives_by_differences(const QuadrantModel& model, double h) {
  const double yp = branch_Y0(model, 1.0 + h).real();
  const double ym = branch_Y0(model, 1.0 - h).real();
  return {(yp - ym) / (2.0 * h), (yp - 2.0 + ym) / (h * h)};
}

CriticalAngle critical_angle(double x1, double y1) {
  CriticalAngle c;
  c.t0 = std::log(x1) / std::log(y1);
  c.gamma0 = std::atan(c.t0);
  return c;
}

CriticalAngle critical_angle(const QuadrantModel& model) {
  return critical_angle(one_d_root(model, Axis::X), one_d_root(model, Axis::Y));
}

std::string RationalityVerdict::to_string() const {
  std::ostringstream os;
  if (rational)
    os << "Rational(" << p << "," << q << ")";
  else
    os << "NoRationalWithin(" << qmax << ")";
  return os.str();
}

RationalityVerdict classify_t0(double t0, long long qmax, double tol) {
  RationalityVerdict v;
  v.qmax = qmax;
  v.tolerance = tol;
  if (!(t0 > 0.0) || !std::isfinite(t0)) return v;
  const long double target = t0;
  long double x = target;
  long long h2 = 0, h1 = 1, k2 = 1, k1 = 0;
  for (int n = 0; n < 64; ++n) {
    const long double a = std::floor(x);
    if (a > 1e15L) break;
    const long long ai = static_cast<long long>(a);
    const long long h = ai * h1 + h2, k = ai * k1 + k2;
    if (k > qmax) break;
    if (std::fabs(target - static_cast<long double>(h) / k) <= tol) {
      v.rational = true;
      v.p = h;
      v.q = k;
      return v;
    }
    const long double frac = x - a;
    if (frac <= 0.0L) break;
    x = 1.0L / frac;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
  }
  return v;
}

TorusReport torus_check(const QuadrantModel& model, int grid_n, double cap,
                        double flag_threshold) {
  if (grid_n < 1) throw ValidationError("torus grid must be positive");
  const double two_pi = 2.0 * std::numbers::pi;
  auto wrap = [&](double t) { return t > std::numbers::pi ? t - two_pi : t; };
  struct RowMin {
    double d = std::numeric_limits<double>::infinity();
    double theta = 0.0, phi = 0.0;
  };
  std::vector<RowMin> rows(grid_n);
  parallel_for(grid_n, [&](std::size_t a) {
    const double theta = two_pi * double(a) / grid_n;
    const Complex x = std::polar(1.0, theta);
    RowMin best;
    for (int b = 0; b < grid_n; ++b) {
      const double phi = two_pi * double(b) / grid_n;
      if (std::hypot(wrap(theta), wrap(phi)) < cap) continue;
      const double d = std::abs(model.interior().symbol(x, std::polar(1.0, phi)) - 1.0);
      if (d < best.d) best = {d, theta, phi};
    }
    rows[a] = best;
  });
  TorusReport r;
  r.min_distance = std::numeric_limits<double>::infinity();
  for (const auto& row : rows)
    if (row.d < r.min_distance) {
      r.min_distance = row.d;
      r.theta = row.theta;
      r.phi = row.phi;
    }
  r.flagged = r.min_distance < flag_threshold;
  return r;
}

double item7_check(const QuadrantModel& model, double eps, int n_angle, int n_radius) {
  const double x_abs = 1.0 + eps;
  const JumpLaw law = tilted_law(model.interior(), x_abs);
  const double tau = convex_minimizer(law);
  if (!(law.symbol(tau) < 1.0)) throw NoSecondRoot("Q(1 + eps, y) has fewer than two zeros");
  double lo = 0.5 * tau;
  while (law.symbol(lo) <= 1.0) lo *= 0.5;
  const double y0 = bisect_level(law, lo, tau);
  const double y1 = branch_Y1(model, eps);
  const double two_pi = 2.0 * std::numbers::pi;
  double worst = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= n_radius; ++r) {
    const double rad = y0 + (y1 - y0) * double(r) / (n_radius + 1);
    for (int a = 0; a < n_angle; ++a) {
      const Complex x = std::polar(x_abs, two_pi * a / n_angle);
      for (int b = 0; b < n_angle; ++b) {
        const Complex y = std::polar(rad, two_pi * b / n_angle);
        worst = std::min(worst, std::abs(model.interior().symbol(x, y) - 1.0));
      }
    }
  }
  return worst;
}

double item8_check(const QuadrantModel& model, double eps, const std::vector<double>& t_grid) {
  const double x1 = one_d_root(model, Axis::X), y1 = one_d_root(model, Axis::Y);
  const double Y1 = branch_Y1(model, eps);
  double worst = std::numeric_limits<double>::infinity();
  for (double t : t_grid)
    worst = std::min(worst, (1.0 + eps) * std::pow(Y1, t) - std::min(x1, std::pow(y1, t)));
  return worst;
}

KernelAnalysis analyze_kernel(const QuadrantModel& model, const KernelOptions& options) {
  KernelAnalysis k;
  k.x1 = one_d_root(model, Axis::X);
  k.y1 = one_d_root(model, Axis::Y);
  const auto d = derivatives_at_one(model);
  k.a = d.a;
  k.b = 0.5 * d.bb;
  const auto c = critical_angle(k.x1, k.y1);
  k.t0 = c.t0;
  k.gamma0 = c.gamma0;
  k.y0_radius = branch_radius(model);
  k.verdict = classify_t0(k.t0, options.qmax, options.tolerance);
  return k;
}

}  // namespace quadrant
