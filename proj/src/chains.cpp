#include "quadrant/chains.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quadrant/error.hpp"
#include "quadrant/kernel.hpp"

namespace quadrant {

namespace {

// Row-banded matrix: row i stores columns [i - lower, i + upper].
class Band {
 public:
  Band(long n, int lower, int upper)
      : n_(n), lower_(lower), upper_(upper), data_(std::size_t(n) * (lower + upper + 1), 0.0) {}
  double& at(long i, long j) { return data_[std::size_t(i) * (lower_ + upper_ + 1) + (j - i + lower_)]; }
  bool inside(long i, long j) const { return j - i >= -lower_ && j - i <= upper_ && j >= 0 && j < n_; }
  int lower() const { return lower_; }
  int upper() const { return upper_; }

 private:
  long n_;
  int lower_, upper_;
  std::vector<double> data_;
};

int max_up(const InducedChain& chain) {
  int up = std::max(0, chain.interior().max_jump());
  for (int k = 0; k < chain.k0(); ++k) up = std::max(up, chain.law(k).max_jump());
  return up;
}

Band truncated_matrix(const InducedChain& chain, long L) {
  const int k0 = chain.k0();
  Band P(L + 1, k0, max_up(chain));
  for (long k = 0; k <= L; ++k)
    for (auto [t, p] : chain.row(k)) P.at(k, std::min(t, L)) += p;
  return P;
}

std::vector<double> gth_solve(const InducedChain& chain, long L) {
  Band P = truncated_matrix(chain, L);
  const int lo = P.lower(), up = P.upper();
  std::vector<double> s(L + 1, 0.0);
  for (long n = L; n >= 1; --n) {
    double sum = 0.0;
    for (long j = std::max(0L, n - lo); j < n; ++j) sum += P.at(n, j);
    if (!(sum > 0.0)) {
      std::ostringstream os;
      os << "degenerate chain: state " << n << " never moves below itself";
      throw NotConverged(os.str());
    }
    s[n] = sum;
    for (long i = std::max(0L, n - up); i < n; ++i) {
      const double pin = P.at(i, n);
      if (pin == 0.0) continue;
      const double f = pin / sum;
      for (long j = std::max(0L, n - lo); j < n; ++j)
        if (P.inside(i, j)) P.at(i, j) += f * P.at(n, j);
    }
  }
  std::vector<double> pi(L + 1, 0.0);
  pi[0] = 1.0;
  for (long n = 1; n <= L; ++n) {
    double acc = 0.0;
    for (long i = std::max(0L, n - up); i < n; ++i) acc += pi[i] * P.at(i, n);
    pi[n] = acc / s[n];
  }
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;
  return pi;
}

double balance_residual(const InducedChain& chain, const std::vector<double>& pi) {
  const long L = long(pi.size()) - 1;
  std::vector<double> out(pi.size(), 0.0);
  for (long k = 0; k <= L; ++k)
    for (auto [t, p] : chain.row(k)) out[std::min(t, L)] += pi[k] * p;
  double r = 0.0;
  for (long k = 0; k <= L; ++k) r += std::abs(out[k] - pi[k]);
  return r;
}

}  // namespace

ChainSolution stationary(const InducedChain& chain, const StationaryOptions& options) {
  if (!(chain.interior().mean() < 0.0))
    throw NotConverged(std::string("induced chain along ") + to_string(chain.axis()) +
                       " has nonnegative drift; no stationary law");
  const int k0 = chain.k0();
  long L = std::max<long>(options.initial_states, 8L * (k0 + max_up(chain)));
  std::vector<double> prev = gth_solve(chain, L);
  int doublings = 0;
  for (;;) {
    const long next = 2 * L;
    if (next + 1 > options.max_states)
      throw NotConverged("stationary law did not settle below the state cap");
    std::vector<double> cur = gth_solve(chain, next);
    ++doublings;
    double change = 0.0;
    for (int k = 0; k < k0; ++k) change = std::max(change, std::abs(cur[k] - prev[k]));
    L = next;
    prev = std::move(cur);
    if (change < options.tolerance) break;
  }
  ChainSolution sol;
  sol.axis = chain.axis();
  sol.L = L;
  sol.pi = std::move(prev);
  sol.doublings = doublings;
  sol.residual = balance_residual(chain, sol.pi);
  // Misplaced mass: the folded cap state plus a geometric continuation past it.
  const long a = L / 2, b = 3 * L / 4;
  double ratio = 1.0;
  if (sol.pi[a] > 0.0 && sol.pi[b] > 0.0) ratio = std::pow(sol.pi[b] / sol.pi[a], 1.0 / double(b - a));
  sol.tail_bound = ratio < 1.0 ? sol.pi[L] / (1.0 - ratio) : 1.0;
  return sol;
}

double speed(const QuadrantModel& model, Axis axis, const ChainSolution& solution) {
  const int k0 = model.k0();
  const Axis other = axis == Axis::X ? Axis::Y : Axis::X;
  double head = 0.0, V = 0.0;
  for (int k = 0; k < k0; ++k) {
    const auto& law = axis == Axis::X ? model.vertical(k) : model.horizontal(k);
    V += solution.at(k) * law.marginal(other).mean();
    head += solution.at(k);
  }
  V += (1.0 - head) * model.interior().marginal(other).mean();
  return V;
}

TailEstimate tail_constant(const QuadrantModel& model, const ChainSolution& solution, double root,
                           long lo, long hi) {
  TailEstimate t;
  t.root = root;
  t.lo = lo < 0 ? solution.L / 2 : lo;
  t.hi = hi < 0 ? 3 * solution.L / 4 : hi;
  std::vector<double> xs, ys;
  for (long i = t.lo; i <= t.hi; ++i) {
    const double p = solution.at(i);
    if (p > 1e-300) {
      xs.push_back(double(i));
      ys.push_back(std::log(p));
    }
  }
  if (xs.size() < 8) throw FitUnstable("tail fit window holds fewer than 8 usable states");
  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  t.slope = sxy / sxx;
  t.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  double logA = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) logA += ys[k] + xs[k] * std::log(root);
  t.A_fit = std::exp(logA / n);

  const Kernel K(model);
  const int k0 = model.k0();
  double num = 0.0, dQ = 0.0;
  if (solution.axis == Axis::X) {
    for (int k = 0; k < k0; ++k) num += solution.at(k) * K.q_vertical(k, root, 1.0).real();
    dQ = K.Q_gradient(root, 1.0).first.real();
  } else {
    for (int l = 0; l < k0; ++l) num += solution.at(l) * K.q_horizontal(l, 1.0, root).real();
    dQ = K.Q_gradient(1.0, root).second.real();
  }
  t.A_closed = num / (std::pow(root, 1 - k0) * dQ);
  t.quality = std::abs(t.A_fit - t.A_closed) / std::abs(t.A_closed);
  return t;
}

ChainSolution solve_chain(const QuadrantModel& model, Axis axis, const StationaryOptions& options) {
  ChainSolution sol = stationary(induced_chain(model, axis), options);
  sol.V = speed(model, axis, sol);
  sol.tail = tail_constant(model, sol, one_d_root(model, axis));
  return sol;
}

void check_speeds(const QuadrantModel& model, ModelReport& report,
                  const StationaryOptions& options) {
  for (Axis axis : {Axis::X, Axis::Y}) {
    const std::string name = axis == Axis::X ? "assumption: V1 > 0" : "assumption: V2 > 0";
    try {
      const ChainSolution sol = stationary(induced_chain(model, axis), options);
      const double V = speed(model, axis, sol);
      std::ostringstream os;
      os.precision(12);
      os << (axis == Axis::X ? "V1 = " : "V2 = ") << V;
      report.add(name, V > 0.0, os.str());
    } catch (const NumericError& e) {
      report.add(name, false, e.what());
    }
  }
}

}  // namespace quadrant
