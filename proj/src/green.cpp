#include "quadrant/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "quadrant/error.hpp"
#include "quadrant/kernel.hpp"
#include "quadrant/parallel.hpp"
#include "quadrant/simulate.hpp"

namespace quadrant {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

Complex ipow(Complex z, long n) {
  Complex r = 1.0;
  while (n > 0) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

// Sum c[n] x^n for n <= N plus c[N] x^{N+1} / (1 - x).
Complex series(const std::vector<double>& c, Complex x) {
  Complex s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  if (!c.empty()) s += c.back() * ipow(x, long(c.size())) / (1.0 - x);
  return s;
}

// Exit score for the escape solve: 1 above the ray j = t0 i, 0 below, 1/2 on it.
double above_ray(long i, long j, double t0) {
  const double d = double(j) - t0 * double(i);
  if (std::abs(d) <= 1e-9 * std::max(1.0, double(i))) return 0.5;
  return d > 0.0 ? 1.0 : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// WindowSolver

struct WindowSolver::Impl {
  SpMat A;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
};

WindowSolver::WindowSolver(const QuadrantModel& model, Window window)
    : window_(window), impl_(std::make_unique<Impl>()) {
  const long n = window.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(n) * 6);
  for (long i = 0; i <= window.Lx; ++i)
    for (long j = 0; j <= window.Ly; ++j) {
      const long r = window.index(i, j);
      double diag = 1.0;
      for (const auto& e : model.at(i, j).entries()) {
        const long a = i + e.step.di, b = j + e.step.dj;
        if (!window.contains(a, b) || e.p == 0.0) continue;
        const long c = window.index(a, b);
        if (c == r)
          diag -= e.p;
        else
          trips.emplace_back(int(r), int(c), -e.p);
      }
      trips.emplace_back(int(r), int(r), diag);
    }
  impl_->A.resize(int(n), int(n));
  impl_->A.setFromTriplets(trips.begin(), trips.end());
  impl_->A.makeCompressed();
  impl_->lu.compute(impl_->A);
  if (impl_->lu.info() != Eigen::Success)
    throw NumericError("sparse LU of the window system failed: " + impl_->lu.lastErrorMessage());
}

WindowSolver::~WindowSolver() = default;
WindowSolver::WindowSolver(WindowSolver&&) noexcept = default;
WindowSolver& WindowSolver::operator=(WindowSolver&&) noexcept = default;

std::vector<double> WindowSolver::green_row(State source) const {
  if (!window_.contains(source.i, source.j)) throw ValidationError("source outside the window");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(window_.size());
  b(window_.index(source.i, source.j)) = 1.0;
  const Eigen::VectorXd g = impl_->lu.transpose().solve(b);
  return {g.data(), g.data() + g.size()};
}

std::vector<double> WindowSolver::harmonic(const std::vector<double>& rhs) const {
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), long(rhs.size()));
  const Eigen::VectorXd h = impl_->lu.solve(b);
  return {h.data(), h.data() + h.size()};
}

// ---------------------------------------------------------------------------
// Exact Green function

double GreenTable::value(long i, long j) const {
  return outer.contains(i, j) ? values[outer.index(i, j)] : 0.0;
}

double GreenTable::error_gap(long i, long j) const {
  return inner.contains(i, j) ? gap[inner.index(i, j)] : std::numeric_limits<double>::infinity();
}

namespace {

double balance(const QuadrantModel& model, const Window& w, const std::vector<double>& g,
               State source) {
  std::vector<double> flow(g.size(), 0.0);
  for (long i = 0; i <= w.Lx; ++i)
    for (long j = 0; j <= w.Ly; ++j) {
      const double gz = g[w.index(i, j)];
      for (const auto& e : model.at(i, j).entries()) {
        const long a = i + e.step.di, b = j + e.step.dj;
        if (w.contains(a, b)) flow[w.index(a, b)] += gz * e.p;
      }
    }
  flow[w.index(source.i, source.j)] += 1.0;
  double r = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) r = std::max(r, std::abs(g[k] - flow[k]));
  return r;
}

}  // namespace

GreenTable green_exact(const QuadrantModel& model, State source, const GreenOptions& options) {
  std::vector<State> targets = options.targets;
  targets.push_back(source);
  long need = 0;
  for (const auto& t : targets) need = std::max({need, t.i, t.j});
  long L = std::max(options.initial_window, need + 4L * model.k0());
  GreenTable table;
  table.model = &model;
  table.source = source;
  for (int step = 0;; ++step) {
    const long M = options.margin > 0 ? options.margin : std::max(16L, L / 4);
    const Window inner{L, L}, outer{L + M, L + M};
    if (outer.size() > options.max_states)
      throw WindowExplosion("Green window exceeds the state budget before the gap closed");
    const auto g_in = WindowSolver(model, inner).green_row(source);
    auto g_out = WindowSolver(model, outer).green_row(source);
    double worst = 0.0;
    for (const auto& t : targets)
      worst = std::max(worst, g_out[outer.index(t.i, t.j)] - g_in[inner.index(t.i, t.j)]);
    if (worst < options.gap_tolerance || step > 60) {
      if (!(worst < options.gap_tolerance))
        throw WindowExplosion("Green window growth did not close the gap");
      table.inner = inner;
      table.outer = outer;
      table.gap.assign(std::size_t(inner.size()), 0.0);
      for (long i = 0; i <= L; ++i)
        for (long j = 0; j <= L; ++j)
          table.gap[inner.index(i, j)] = g_out[outer.index(i, j)] - g_in[inner.index(i, j)];
      table.values = std::move(g_out);
      table.balance_residual = balance(model, outer, table.values, source);
      table.growth_steps = step;
      return table;
    }
    L = long(std::ceil(double(L) * options.growth));
  }
}

// ---------------------------------------------------------------------------
// Monte Carlo Green function

std::vector<McGreenEstimate> green_mc(const QuadrantModel& model, State source,
                                      const std::vector<State>& targets, long max_steps, long reps,
                                      std::uint64_t seed, unsigned workers) {
  if (targets.empty()) return {};
  if (reps < 2) throw ValidationError("green_mc needs at least two replicas");
  long i_lo = targets[0].i, i_hi = i_lo, j_lo = targets[0].j, j_hi = j_lo;
  for (const auto& t : targets) {
    i_lo = std::min(i_lo, t.i);
    i_hi = std::max(i_hi, t.i);
    j_lo = std::min(j_lo, t.j);
    j_hi = std::max(j_hi, t.j);
  }
  const long bw = j_hi - j_lo + 1;
  std::vector<int> lookup(std::size_t((i_hi - i_lo + 1) * bw), -1);
  for (std::size_t t = 0; t < targets.size(); ++t)
    lookup[std::size_t((targets[t].i - i_lo) * bw + targets[t].j - j_lo)] = int(t);
  const std::size_t nt = targets.size();
  std::vector<double> counts(std::size_t(reps) * nt, 0.0), late(std::size_t(reps) * nt, 0.0);
  parallel_for(
      std::size_t(reps),
      [&](std::size_t r) {
        PathConfig cfg;
        cfg.start = source;
        cfg.max_steps = max_steps;
        cfg.seed = seed;
        cfg.stream = 4 * r;
        PathSimulator sim(model, cfg);
        auto visit = [&](State z, long n) {
          if (z.i < i_lo || z.i > i_hi || z.j < j_lo || z.j > j_hi) return;
          const int t = lookup[std::size_t((z.i - i_lo) * bw + z.j - j_lo)];
          if (t < 0) return;
          counts[r * nt + t] += 1.0;
          if (2 * n > max_steps) late[r * nt + t] += 1.0;
        };
        visit(sim.state(), 0);
        for (long n = 1; n <= max_steps; ++n) visit(sim.next(), n);
      },
      workers);
  std::vector<McGreenEstimate> out(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    auto& e = out[t];
    e.target = targets[t];
    double s = 0.0, l = 0.0;
    for (long r = 0; r < reps; ++r) {
      s += counts[std::size_t(r) * nt + t];
      l += late[std::size_t(r) * nt + t];
    }
    e.mean = s / double(reps);
    e.censor_bound = l / double(reps);
    double ss = 0.0;
    for (long r = 0; r < reps; ++r) {
      const double d = counts[std::size_t(r) * nt + t] - e.mean;
      ss += d * d;
    }
    e.stderr_ = std::sqrt(ss / double(reps - 1) / double(reps));
    e.half_width = 2.5758293035489004 * e.stderr_ + e.censor_bound;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Escape probabilities

std::vector<EscapeProbabilities> escape_exact(const QuadrantModel& model,
                                              const std::vector<State>& sources, double t0,
                                              const EscapeOptions& options) {
  long need = 0;
  for (const auto& s : sources) need = std::max({need, s.i, s.j});
  long L = std::max(options.initial_window, 2 * need + 20);
  std::vector<EscapeProbabilities> prev;
  for (int step = 0; step < 60; ++step) {
    const Window w{L, L};
    if (w.size() > options.max_states)
      throw WindowExplosion("escape window exceeds the state budget before stabilizing");
    std::vector<double> b1(std::size_t(w.size()), 0.0), b2(std::size_t(w.size()), 0.0);
    for (long i = 0; i <= L; ++i)
      for (long j = 0; j <= L; ++j)
        for (const auto& e : model.at(i, j).entries()) {
          const long a = i + e.step.di, c = j + e.step.dj;
          if (w.contains(a, c)) continue;
          const double s = above_ray(a, c, t0);
          b1[w.index(i, j)] += e.p * s;
          b2[w.index(i, j)] += e.p * (1.0 - s);
        }
    const WindowSolver solver(model, w);
    const auto h1 = solver.harmonic(b1), h2 = solver.harmonic(b2);
    std::vector<EscapeProbabilities> cur;
    double change = 0.0;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      EscapeProbabilities e;
      e.source = sources[k];
      e.method = "exact-solve";
      e.pN1 = std::clamp(h1[w.index(sources[k].i, sources[k].j)], 0.0, 1.0);
      e.pN2 = std::clamp(h2[w.index(sources[k].i, sources[k].j)], 0.0, 1.0);
      if (!prev.empty())
        change = std::max({change, std::abs(e.pN1 - prev[k].pN1), std::abs(e.pN2 - prev[k].pN2)});
      cur.push_back(e);
    }
    if (!prev.empty() && change < options.tolerance) {
      for (auto& e : cur) e.change = change;
      return cur;
    }
    prev = std::move(cur);
    L = long(std::ceil(double(L) * options.growth));
  }
  throw WindowExplosion("escape probabilities did not stabilize");
}

EscapeProbabilities escape_mc(const QuadrantModel& model, State source, double t0,
                              long max_steps, long reps, std::uint64_t seed, unsigned workers) {
  std::vector<double> score(std::size_t(reps), 0.0);
  parallel_for(
      std::size_t(reps),
      [&](std::size_t r) {
        PathConfig cfg;
        cfg.start = source;
        cfg.max_steps = max_steps;
        cfg.seed = seed;
        cfg.stream = 4 * r;
        PathSimulator sim(model, cfg);
        State z = sim.state();
        for (long n = 0; n < max_steps; ++n) z = sim.next();
        score[r] = above_ray(z.i, z.j, t0);
      },
      workers);
  double s = 0.0;
  for (double v : score) s += v;
  EscapeProbabilities e;
  e.source = source;
  e.method = "monte-carlo";
  e.pN1 = s / double(reps);
  e.pN2 = 1.0 - e.pN1;
  std::tie(e.ci_low1, e.ci_high1) = wilson_interval(long(std::llround(s)), reps, 2.5758293035489004);
  return e;
}

// ---------------------------------------------------------------------------
// Generating functions

GeneratingFunctions::GeneratingFunctions(const QuadrantModel& model, const GreenTable& table,
                                         long imax)
    : model_(&model), table_(&table) {
  const int k0 = model.k0();
  imax_ = imax > 0 ? imax : 3 * table.certified_extent() / 4;
  if (imax_ < k0 + 4) throw ValidationError("generating-function truncation too short");
  const long N = imax_ - k0;
  gl_.assign(k0, std::vector<double>(N + 1));
  gt_.assign(k0, std::vector<double>(N + 1));
  for (int l = 0; l < k0; ++l)
    for (long n = 0; n <= N; ++n) {
      gl_[l][n] = table.value(k0 + n, l);
      gt_[l][n] = table.value(l, k0 + n);
    }
  G_.assign(N + 1, std::vector<double>(N + 1));
  for (long a = 0; a <= N; ++a)
    for (long b = 0; b <= N; ++b) G_[a][b] = table.value(k0 + a, k0 + b);
}

Complex GeneratingFunctions::g_l(int l, Complex x) const { return series(gl_.at(l), x); }

Complex GeneratingFunctions::gt_k(int k, Complex y) const { return series(gt_.at(k), y); }

Complex GeneratingFunctions::f(Complex x, Complex y) const {
  const Kernel K(*model_);
  const int k0 = model_->k0();
  Complex s = ipow(x, table_->source.i) * ipow(y, table_->source.j);
  for (int k = 0; k < k0; ++k)
    for (int l = 0; l < k0; ++l) s += table_->value(k, l) * K.q_corner(k, l, x, y);
  return s;
}

Complex GeneratingFunctions::G(Complex x, Complex y) const {
  const long N = long(G_.size()) - 1;
  // Rows in y (with their own tails), then Horner in x with the tail of the last row.
  Complex acc = 0.0, last_row = 0.0;
  for (long a = N; a >= 0; --a) {
    const Complex row = series(G_[a], y);
    if (a == N) last_row = row;
    acc = acc * x + row;
  }
  return acc + last_row * ipow(x, N + 1) / (1.0 - x);
}

Complex GeneratingFunctions::numerator(Complex x, Complex y) const {
  const Kernel K(*model_);
  const int k0 = model_->k0();
  Complex s = f(x, y);
  for (int l = 0; l < k0; ++l) s += K.q_horizontal(l, x, y) * g_l(l, x);
  for (int k = 0; k < k0; ++k) s += K.q_vertical(k, x, y) * gt_k(k, y);
  return s;
}

Complex GeneratingFunctions::functional_residual(Complex x, Complex y) const {
  return -Kernel(*model_).Q(x, y) * G(x, y) - numerator(x, y);
}

double GeneratingFunctions::error_estimate(double radius) const {
  const long N = imax_ - model_->k0();
  double drift = 0.0;
  auto tail_drift = [&](const std::vector<double>& c) {
    drift = std::max(drift, std::abs(c[N] - c[N - 1]));
  };
  for (const auto& c : gl_) tail_drift(c);
  for (const auto& c : gt_) tail_drift(c);
  double gap = 0.0;
  for (long i = 0; i <= imax_; ++i)
    for (long j = 0; j <= imax_; ++j) gap = std::max(gap, table_->error_gap(i, j));
  const double w = 1.0 / ((1.0 - radius) * (1.0 - radius));
  return (drift * std::pow(radius, double(N)) + gap) * w;
}

// ---------------------------------------------------------------------------
// Contour oracle

ContourOracle::ContourOracle(const QuadrantModel& model, const GeneratingFunctions& gens,
                             double eps, int quad_n, unsigned workers)
    : k0_(model.k0()), n_(quad_n), r_(1.0 - eps) {
  if (!(eps > 0.0 && eps < 1.0) || quad_n < 8) throw ValidationError("bad quadrature parameters");
  const Kernel K(model);
  std::vector<Complex> nodes(static_cast<std::size_t>(quad_n));
  for (int a = 0; a < quad_n; ++a)
    nodes[a] = std::polar(r_, 2.0 * std::numbers::pi * a / quad_n);
  const std::vector<Complex> blank(static_cast<std::size_t>(quad_n));
  std::vector<std::vector<Complex>> gl(static_cast<std::size_t>(k0_), blank), gt = gl;
  for (int l = 0; l < k0_; ++l)
    for (int a = 0; a < quad_n; ++a) {
      gl[l][a] = gens.g_l(l, nodes[a]);
      gt[l][a] = gens.gt_k(l, nodes[a]);
    }
  grid_.assign(std::size_t(quad_n) * quad_n, 0.0);
  std::vector<double> row_min(static_cast<std::size_t>(quad_n), std::numeric_limits<double>::infinity());
  parallel_for(
      std::size_t(quad_n),
      [&](std::size_t a) {
        const Complex x = nodes[a];
        for (int b = 0; b < quad_n; ++b) {
          const Complex y = nodes[b];
          Complex num = gens.f(x, y);
          for (int l = 0; l < k0_; ++l) num += K.q_horizontal(l, x, y) * gl[l][a];
          for (int k = 0; k < k0_; ++k) num += K.q_vertical(k, x, y) * gt[k][b];
          const Complex q = K.Q(x, y);
          row_min[a] = std::min(row_min[a], std::abs(q));
          grid_[a * quad_n + b] = -num / q;
        }
      },
      workers);
  min_abs_Q_ = *std::min_element(row_min.begin(), row_min.end());
}

Complex ContourOracle::coefficient(long i, long j) const {
  const long n = i - k0_, m = j - k0_;
  if (n < 0 || m < 0) throw ValidationError("contour oracle needs i, j >= k0");
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Complex> ph_m(static_cast<std::size_t>(n_));
  for (int b = 0; b < n_; ++b) ph_m[b] = std::polar(1.0, -two_pi * double((m * b) % n_) / n_);
  Complex total = 0.0;
  for (int a = 0; a < n_; ++a) {
    Complex row = 0.0;
    for (int b = 0; b < n_; ++b) row += grid_[std::size_t(a) * n_ + b] * ph_m[b];
    total += row * std::polar(1.0, -two_pi * double((n * a) % n_) / n_);
  }
  return total / (double(n_) * n_) * std::pow(r_, -double(n + m));
}

double ContourOracle::imaginary(long i, long j) const { return coefficient(i, j).imag(); }

double ContourOracle::value(long i, long j) const {
  const Complex c = coefficient(i, j);
  if (std::abs(c.imag()) > 1e-8)
    throw QuadratureUnstable("contour quadrature has a large imaginary part; raise quad_n or eps");
  return c.real();
}

double contour_green_oracle(const QuadrantModel& model, const GeneratingFunctions& gens,
                            State target, double eps, int quad_n) {
  return ContourOracle(model, gens, eps, quad_n).value(target.i, target.j);
}

}  // namespace quadrant
