#include "quadrant/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "quadrant/error.hpp"

namespace quadrant {

// ---------------------------------------------------------------------------
// JumpLaw

double JumpLaw::mean() const {
  double m = 0.0;
  for (auto [d, p] : jumps) m += d * p;
  return m;
}

double JumpLaw::total() const {
  double s = 0.0;
  for (auto [d, p] : jumps) s += p;
  return s;
}

int JumpLaw::min_jump() const { return jumps.empty() ? 0 : jumps.front().first; }
int JumpLaw::max_jump() const { return jumps.empty() ? 0 : jumps.back().first; }

double JumpLaw::symbol(double x) const {
  double s = 0.0;
  for (auto [d, p] : jumps) s += p * std::pow(x, d);
  return s;
}

double JumpLaw::symbol_derivative(double x) const {
  double s = 0.0;
  for (auto [d, p] : jumps) s += p * d * std::pow(x, d - 1);
  return s;
}

// ---------------------------------------------------------------------------
// StepDistribution

StepDistribution::StepDistribution(std::vector<Entry> entries) {
  std::map<Offset, Entry> merged;
  for (auto& e : entries) {
    auto [it, inserted] = merged.try_emplace(e.step, e);
    if (!inserted) {
      it->second.p += e.p;
      if (it->second.exact && e.exact)
        *it->second.exact += *e.exact;
      else
        it->second.exact.reset();
    }
  }
  entries_.reserve(merged.size());
  for (auto& [_, e] : merged) entries_.push_back(e);
}

StepDistribution StepDistribution::from_masses(
    std::initializer_list<std::tuple<int, int, double>> masses) {
  std::vector<Entry> entries;
  for (auto [di, dj, p] : masses) entries.push_back({{di, dj}, p, std::nullopt});
  return StepDistribution(std::move(entries));
}

StepDistribution StepDistribution::mixture(const StepDistribution& a, const StepDistribution& b,
                                           double lambda) {
  std::vector<Entry> entries;
  for (const auto& e : a.entries_) entries.push_back({e.step, lambda * e.p, std::nullopt});
  for (const auto& e : b.entries_) entries.push_back({e.step, (1.0 - lambda) * e.p, std::nullopt});
  return StepDistribution(std::move(entries));
}

double StepDistribution::total_mass() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.p;
  return s;
}

std::optional<Fraction> StepDistribution::exact_total() const {
  Fraction s(0);
  for (const auto& e : entries_) {
    if (!e.exact) return std::nullopt;
    s += *e.exact;
  }
  return s;
}

double StepDistribution::mass(Offset step) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), step,
                             [](const Entry& e, Offset s) { return e.step < s; });
  return (it != entries_.end() && it->step == step) ? it->p : 0.0;
}

double StepDistribution::min_positive_mass() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries_)
    if (e.p > 0.0) m = std::min(m, e.p);
  return m;
}

Offset StepDistribution::support_min() const {
  Offset lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
  for (const auto& e : entries_) {
    if (e.p <= 0.0) continue;
    lo.di = std::min(lo.di, e.step.di);
    lo.dj = std::min(lo.dj, e.step.dj);
  }
  return lo;
}

Offset StepDistribution::support_max() const {
  Offset hi{std::numeric_limits<int>::min(), std::numeric_limits<int>::min()};
  for (const auto& e : entries_) {
    if (e.p <= 0.0) continue;
    hi.di = std::max(hi.di, e.step.di);
    hi.dj = std::max(hi.dj, e.step.dj);
  }
  return hi;
}

namespace {

Complex ipow(Complex x, int n) {
  if (n == 0) return 1.0;
  if (n < 0) return 1.0 / ipow(x, -n);
  Complex r = 1.0;
  Complex b = x;
  while (n) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

}  // namespace

Complex StepDistribution::symbol(Complex x, Complex y) const {
  Complex s = 0.0;
  for (const auto& e : entries_) s += e.p * ipow(x, e.step.di) * ipow(y, e.step.dj);
  return s;
}

std::pair<Complex, Complex> StepDistribution::symbol_gradient(Complex x, Complex y) const {
  Complex gx = 0.0, gy = 0.0;
  for (const auto& e : entries_) {
    if (e.step.di != 0) gx += e.p * double(e.step.di) * ipow(x, e.step.di - 1) * ipow(y, e.step.dj);
    if (e.step.dj != 0) gy += e.p * double(e.step.dj) * ipow(x, e.step.di) * ipow(y, e.step.dj - 1);
  }
  return {gx, gy};
}

JumpLaw StepDistribution::marginal(Axis axis) const {
  std::map<int, double> acc;
  for (const auto& e : entries_) acc[axis == Axis::X ? e.step.di : e.step.dj] += e.p;
  JumpLaw law;
  for (auto [d, p] : acc)
    if (p > 0.0) law.jumps.emplace_back(d, p);
  return law;
}

StepDistribution StepDistribution::transposed() const {
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back({{e.step.dj, e.step.di}, e.p, e.exact});
  return StepDistribution(std::move(out));
}

DriftVector drift(const StepDistribution& dist) {
  DriftVector m;
  for (const auto& e : dist.entries()) {
    m.m1 += e.step.di * e.p;
    m.m2 += e.step.dj * e.p;
  }
  return m;
}

double moment_transform(const StepDistribution& dist, std::array<double, 2> alpha) {
  double s = 0.0;
  for (const auto& e : dist.entries())
    s += e.p * std::exp(alpha[0] * e.step.di + alpha[1] * e.step.dj);
  return s;
}

// ---------------------------------------------------------------------------
// QuadrantModel

QuadrantModel::QuadrantModel(int k0, StepDistribution interior,
                             std::vector<StepDistribution> horizontal,
                             std::vector<StepDistribution> vertical,
                             std::vector<StepDistribution> corner)
    : k0_(k0),
      interior_(std::move(interior)),
      horizontal_(std::move(horizontal)),
      vertical_(std::move(vertical)),
      corner_(std::move(corner)) {
  if (k0_ < 1) throw ValidationError("k0 must be a positive integer");
  const auto k = static_cast<std::size_t>(k0_);
  if (horizontal_.size() != k)
    throw ValidationError("expected " + std::to_string(k0_) + " horizontal boundary laws");
  if (vertical_.size() != k)
    throw ValidationError("expected " + std::to_string(k0_) + " vertical boundary laws");
  if (corner_.size() != k * k)
    throw ValidationError("expected " + std::to_string(k0_ * k0_) + " corner laws");
}

Domain QuadrantModel::domain(long i, long j) const {
  const bool ib = i < k0_, jb = j < k0_;
  if (!ib && !jb) return Domain::Interior;
  if (!ib) return Domain::HorizontalStrip;
  if (!jb) return Domain::VerticalStrip;
  return Domain::Corner;
}

const StepDistribution& QuadrantModel::at(long i, long j) const {
  switch (domain(i, j)) {
    case Domain::Interior: return interior_;
    case Domain::HorizontalStrip: return horizontal_[j];
    case Domain::VerticalStrip: return vertical_[i];
    case Domain::Corner: break;
  }
  return corner_[i * k0_ + j];
}

QuadrantModel QuadrantModel::transposed() const {
  std::vector<StepDistribution> h, v, c(corner_.size());
  for (const auto& d : vertical_) h.push_back(d.transposed());
  for (const auto& d : horizontal_) v.push_back(d.transposed());
  for (int i = 0; i < k0_; ++i)
    for (int j = 0; j < k0_; ++j) c[i * k0_ + j] = corner(j, i).transposed();
  QuadrantModel t(k0_, interior_.transposed(), std::move(h), std::move(v), std::move(c));
  t.set_name(name_.empty() ? std::string{} : name_ + "^T");
  return t;
}

std::uint64_t QuadrantModel::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  auto mix_dist = [&](const StepDistribution& d) {
    mix(d.entries().size());
    for (const auto& e : d.entries()) {
      mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(e.step.di)));
      mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(e.step.dj)));
      mix(std::bit_cast<std::uint64_t>(e.p));
    }
  };
  mix(static_cast<std::uint64_t>(k0_));
  mix_dist(interior_);
  for (const auto& d : horizontal_) mix_dist(d);
  for (const auto& d : vertical_) mix_dist(d);
  for (const auto& d : corner_) mix_dist(d);
  return h;
}

// ---------------------------------------------------------------------------
// LocalModel

const StepDistribution& LocalModel::at(long i, long j) const {
  const int k0 = model_->k0();
  switch (kind_) {
    case Kind::Full: return model_->at(i, j);
    case Kind::Z0: return model_->interior();
    case Kind::Z1: return i < k0 ? model_->vertical(static_cast<int>(i)) : model_->interior();
    case Kind::Z2: return j < k0 ? model_->horizontal(static_cast<int>(j)) : model_->interior();
  }
  return model_->interior();
}

bool LocalModel::contains(long i, long j) const {
  switch (kind_) {
    case Kind::Full: return i >= 0 && j >= 0;
    case Kind::Z0: return true;
    case Kind::Z1: return i >= 0;
    case Kind::Z2: return j >= 0;
  }
  return false;
}

// ---------------------------------------------------------------------------
// InducedChain

InducedChain::InducedChain(Axis axis, std::vector<JumpLaw> boundary, JumpLaw interior)
    : axis_(axis), boundary_(std::move(boundary)), interior_(std::move(interior)) {}

const JumpLaw& InducedChain::law(long k) const {
  return k < static_cast<long>(boundary_.size()) ? boundary_[k] : interior_;
}

std::vector<std::pair<long, double>> InducedChain::row(long k) const {
  std::vector<std::pair<long, double>> r;
  for (auto [d, p] : law(k).jumps) r.emplace_back(k + d, p);
  return r;
}

InducedChain induced_chain(const QuadrantModel& model, Axis axis) {
  std::vector<JumpLaw> boundary;
  for (int k = 0; k < model.k0(); ++k) {
    const auto& d = axis == Axis::X ? model.vertical(k) : model.horizontal(k);
    boundary.push_back(d.marginal(axis));
  }
  return InducedChain(axis, std::move(boundary), model.interior().marginal(axis));
}

// ---------------------------------------------------------------------------
// Validation

void ModelReport::add(std::string name, bool passed, std::string message, bool heuristic) {
  checks.push_back({std::move(name), passed, std::move(message), heuristic});
}

bool ModelReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool ModelReport::structural_ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) {
    return c.passed || c.name.rfind("assumption:", 0) == 0;
  });
}

const ModelReport::Check* ModelReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ModelReport::to_text() const {
  std::size_t width = 0;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS  " : "FAIL  ") << c.name << std::string(width - c.name.size() + 2, ' ')
       << c.message;
    if (c.heuristic) os << " [heuristic]";
    os << '\n';
  }
  return os.str();
}

namespace {

struct Family {
  std::string name;
  const StepDistribution* dist;
  Offset floor;
};

std::vector<Family> families(const QuadrantModel& m) {
  const int k0 = m.k0();
  std::vector<Family> out;
  out.push_back({"interior", &m.interior(), {-k0, -k0}});
  for (int j = 0; j < k0; ++j)
    out.push_back({"horizontal[" + std::to_string(j) + "]", &m.horizontal(j), {-k0, -j}});
  for (int i = 0; i < k0; ++i)
    out.push_back({"vertical[" + std::to_string(i) + "]", &m.vertical(i), {-i, -k0}});
  for (int i = 0; i < k0; ++i)
    for (int j = 0; j < k0; ++j)
      out.push_back({"corner[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                     &m.corner(i, j), {-i, -j}});
  return out;
}

// Breadth-first reachability inside a rectangle, forward and backward from a hub.
// Every state of the inner square [0, w]^2 must reach the hub and be reached from it.
bool window_irreducible(const LocalModel& walk, int w, int margin, long hub_i, long hub_j,
                        std::string& detail) {
  const long lo_i = walk.contains(-1, 0) ? -margin : 0;
  const long lo_j = walk.contains(0, -1) ? -margin : 0;
  const long hi = w + margin;
  const long ni = hi - lo_i + 1, nj = hi - lo_j + 1;
  auto index = [&](long i, long j) { return (i - lo_i) * nj + (j - lo_j); };
  const long n = ni * nj;
  std::vector<std::vector<long>> fwd(n), bwd(n);
  for (long i = lo_i; i <= hi; ++i)
    for (long j = lo_j; j <= hi; ++j)
      for (const auto& e : walk.at(i, j).entries()) {
        if (e.p <= 0.0) continue;
        const long a = i + e.step.di, b = j + e.step.dj;
        if (a < lo_i || a > hi || b < lo_j || b > hi) continue;
        fwd[index(i, j)].push_back(index(a, b));
        bwd[index(a, b)].push_back(index(i, j));
      }
  auto bfs = [&](const std::vector<std::vector<long>>& adj) {
    std::vector<char> seen(n, 0);
    std::deque<long> queue{index(hub_i, hub_j)};
    seen[queue.front()] = 1;
    while (!queue.empty()) {
      long s = queue.front();
      queue.pop_front();
      for (long t : adj[s])
        if (!seen[t]) {
          seen[t] = 1;
          queue.push_back(t);
        }
    }
    return seen;
  };
  const auto from_hub = bfs(fwd);
  const auto to_hub = bfs(bwd);
  for (long i = 0; i <= w; ++i)
    for (long j = 0; j <= w; ++j) {
      if (!from_hub[index(i, j)]) {
        detail = "state (" + std::to_string(i) + "," + std::to_string(j) + ") not reachable from hub";
        return false;
      }
      if (!to_hub[index(i, j)]) {
        detail = "hub not reachable from (" + std::to_string(i) + "," + std::to_string(j) + ")";
        return false;
      }
    }
  return true;
}

}  // namespace

ModelReport validate_model(const QuadrantModel& model, const ValidationOptions& options) {
  ModelReport report;
  const auto fams = families(model);

  for (const auto& f : fams) {
    bool nonneg = true;
    for (const auto& e : f.dist->entries()) nonneg = nonneg && e.p >= 0.0 && std::isfinite(e.p);
    report.add("nonnegative: " + f.name, nonneg, nonneg ? "all masses >= 0" : "negative mass");
  }

  for (const auto& f : fams) {
    std::ostringstream msg;
    bool ok;
    if (auto exact = f.dist->exact_total()) {
      ok = *exact == Fraction(1);
      msg << "exact sum " << exact->numerator() << "/" << exact->denominator();
    } else {
      const double s = f.dist->total_mass();
      ok = std::abs(s - 1.0) <= options.tolerance;
      msg.precision(17);
      msg << "sum " << s;
    }
    report.add("row sum: " + f.name, ok, msg.str());
  }

  for (const auto& f : fams) {
    bool ok = true;
    std::ostringstream msg;
    for (const auto& e : f.dist->entries()) {
      if (e.p <= 0.0) continue;
      if (e.step.di < f.floor.di || e.step.dj < f.floor.dj) {
        ok = false;
        msg << "mass at (" << e.step.di << "," << e.step.dj << ") below floor (" << f.floor.di
            << "," << f.floor.dj << ")";
        break;
      }
    }
    if (ok) msg << "support respects floor (" << f.floor.di << "," << f.floor.dj << ")";
    report.add("support floor: " + f.name, ok, msg.str());
  }

  // Finite support is structural in this representation; it makes the exponential
  // moment assumption automatic.
  report.add("finite support", true, "all laws have finite support");

  if (report.structural_ok()) {
    const int k0 = model.k0();
    const int w = options.window > 0 ? options.window : 3 * k0 + 10;
    int span = 0;
    for (const auto& f : fams)
      for (const auto& e : f.dist->entries())
        span = std::max({span, std::abs(e.step.di), std::abs(e.step.dj)});
    const int margin = 2 * span + k0;
    const std::pair<LocalModel::Kind, const char*> walks[] = {
        {LocalModel::Kind::Full, "Z"},
        {LocalModel::Kind::Z0, "Z0"},
        {LocalModel::Kind::Z1, "Z1"},
        {LocalModel::Kind::Z2, "Z2"}};
    for (auto [kind, label] : walks) {
      std::string detail;
      const bool ok = window_irreducible(LocalModel(model, kind), w, margin, k0, k0, detail);
      report.add(std::string("irreducible ") + label, ok,
                 ok ? "window [0," + std::to_string(w) + "]^2 strongly connected" : detail, true);
    }
  }

  const auto m = drift(model.interior());
  std::ostringstream msg;
  msg.precision(10);
  msg << "m = (" << m.m1 << ", " << m.m2 << ")";
  report.add("assumption: negative drift", m.m1 < 0.0 && m.m2 < 0.0, msg.str());
  return report;
}

}  // namespace quadrant
