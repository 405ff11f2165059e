#include "quadrant/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "quadrant/error.hpp"
#include "quadrant/parallel.hpp"

namespace quadrant {

namespace {

int kind_index(LocalModel::Kind k) {
  switch (k) {
    case LocalModel::Kind::Full: return 0;
    case LocalModel::Kind::Z0: return 1;
    case LocalModel::Kind::Z1: return 2;
    case LocalModel::Kind::Z2: return 3;
  }
  return 0;
}

LocalModel::Kind walk_of(const std::string& name) {
  if (name == "tau1(k,l)" || name == "tau1" || name == "T1(k)" || name == "T1k")
    return LocalModel::Kind::Z1;
  if (name == "tau2(k)") return LocalModel::Kind::Z2;
  return LocalModel::Kind::Full;
}

bool hit(const HittingSpec& s, State z, int k0) {
  const long floor_k = std::max<long>(k0 - 1, s.k);
  if (s.name == "tau(k,l)" || s.name == "tau1(k,l)") return z.i == s.k && z.j == s.l;
  if (s.name == "tau" || s.name == "tau1") return z.j < k0;
  if (s.name == "T1(k)") return z.i == s.k;
  if (s.name == "T1k" || s.name == "Tk") return z.i <= floor_k;
  if (s.name == "tau2(k)") return z.j == s.k;
  return false;
}

}  // namespace

Offset sample_step(const StepDistribution& dist, double u) {
  const auto entries = dist.entries();
  double acc = 0.0;
  for (const auto& e : entries) {
    acc += e.p;
    if (u < acc) return e.step;
  }
  // Rounding slack: last entry with positive mass.
  for (auto it = entries.rbegin(); it != entries.rend(); ++it)
    if (it->p > 0.0) return it->step;
  throw NumericError("cannot sample from an empty law");
}

PathSimulator::PathSimulator(const QuadrantModel& model, const PathConfig& config)
    : local_(model, config.kind), rng_(config.seed, config.stream), state_(config.start) {
  if (config.max_steps < 1) throw ValidationError("max_steps must be at least 1");
  if (!local_.contains(state_.i, state_.j))
    throw ValidationError("start state outside the state space of the walk");
}

State PathSimulator::next() {
  const Offset d = sample_step(local_.at(state_.i, state_.j), rng_.uniform(std::uint64_t(steps_)));
  state_.i += d.di;
  state_.j += d.dj;
  ++steps_;
  if (!local_.contains(state_.i, state_.j)) throw NumericError("walk left its state space");
  return state_;
}

std::vector<State> simulate_path(const QuadrantModel& model, const PathConfig& config) {
  PathSimulator sim(model, config);
  std::vector<State> path;
  path.reserve(std::size_t(config.max_steps) + 1);
  path.push_back(sim.state());
  for (long n = 0; n < config.max_steps; ++n) path.push_back(sim.next());
  return path;
}

HittingSpec HittingSpec::parse(const std::string& text) {
  static const std::regex two(R"(^(tau|tau1)\((-?\d+),(-?\d+)\)$)");
  static const std::regex one(R"(^(T1|tau2)\((-?\d+)\)$)");
  static const std::regex param(R"(^(T1k|Tk):(-?\d+)$)");
  std::smatch m;
  HittingSpec s;
  if (text == "tau" || text == "tau1") {
    s.name = text;
  } else if (std::regex_match(text, m, two)) {
    s.name = m[1].str() + "(k,l)";
    s.k = std::stol(m[2]);
    s.l = std::stol(m[3]);
  } else if (std::regex_match(text, m, one)) {
    s.name = m[1].str() + "(k)";
    s.k = std::stol(m[2]);
  } else if (std::regex_match(text, m, param)) {
    s.name = m[1].str();
    s.k = std::stol(m[2]);
  } else {
    throw ValidationError("unknown hitting time '" + text +
                          "' (expected tau, tau1, tau(k,l), tau1(k,l), T1(k), T1k:k, Tk:k, "
                          "tau2(k))");
  }
  return s;
}

std::string HittingSpec::label() const {
  const std::string ks = std::to_string(k), ls = std::to_string(l);
  if (name == "tau(k,l)") return "tau(" + ks + "," + ls + ")";
  if (name == "tau1(k,l)") return "tau1(" + ks + "," + ls + ")";
  if (name == "T1(k)") return "T1(" + ks + ")";
  if (name == "tau2(k)") return "tau2(" + ks + ")";
  if (name == "T1k" || name == "Tk") return name + ":" + ks;
  return name;
}

HittingReport hitting_times(const QuadrantModel& model, const std::vector<HittingSpec>& which,
                            const ReplicaConfig& config) {
  const std::size_t n_specs = which.size();
  const long reps = config.replicas;
  // results[r * n_specs + s] = hitting time or -1 when censored.
  std::vector<long> results(std::size_t(reps) * n_specs, -1);
  std::vector<LocalModel::Kind> kinds;
  for (const auto& s : which) {
    const auto k = walk_of(s.name);
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  parallel_for(
      std::size_t(reps),
      [&](std::size_t r) {
        for (auto kind : kinds) {
          PathConfig cfg;
          cfg.kind = kind;
          cfg.start = config.start;
          cfg.max_steps = config.max_steps;
          cfg.seed = config.seed;
          cfg.stream = 4 * (config.first_stream + r) + kind_index(kind);
          PathSimulator sim(model, cfg);
          std::vector<std::size_t> pending;
          for (std::size_t s = 0; s < n_specs; ++s)
            if (walk_of(which[s].name) == kind) pending.push_back(s);
          for (long n = 1; n <= config.max_steps && !pending.empty(); ++n) {
            const State z = sim.next();
            std::erase_if(pending, [&](std::size_t s) {
              if (!hit(which[s], z, model.k0())) return false;
              results[r * n_specs + s] = n;
              return true;
            });
          }
        }
      },
      config.workers);
  HittingReport report;
  for (std::size_t s = 0; s < n_specs; ++s) {
    HittingStat st;
    st.spec = which[s];
    st.replicas = reps;
    for (long r = 0; r < reps; ++r) {
      const long v = results[std::size_t(r) * n_specs + s];
      if (v < 0) {
        ++st.censored;
      } else {
        ++st.finite;
        st.values.push_back(v);
      }
    }
    if (st.finite > 0) {
      double sum = 0.0;
      for (long v : st.values) sum += double(v);
      st.mean = sum / double(st.finite);
      double ss = 0.0;
      for (long v : st.values) ss += (double(v) - st.mean) * (double(v) - st.mean);
      st.stderr_ = st.finite > 1 ? std::sqrt(ss / double(st.finite - 1) / double(st.finite)) : 0.0;
    }
    report.stats.push_back(std::move(st));
  }
  return report;
}

SlopeEstimate fluid_limit_experiment(const QuadrantModel& model, Axis axis, long n, long reps,
                                     std::uint64_t seed, unsigned workers) {
  if (n < 1 || reps < 2) throw ValidationError("fluid limit needs n >= 1 and reps >= 2");
  const auto kind = axis == Axis::X ? LocalModel::Kind::Z1 : LocalModel::Kind::Z2;
  std::vector<double> slopes(std::size_t(reps), 0.0);
  parallel_for(
      std::size_t(reps),
      [&](std::size_t r) {
        PathConfig cfg;
        cfg.kind = kind;
        cfg.start = {0, 0};
        cfg.max_steps = n;
        cfg.seed = seed;
        cfg.stream = 4 * r + kind_index(kind);
        PathSimulator sim(model, cfg);
        State z;
        for (long k = 0; k < n; ++k) z = sim.next();
        slopes[r] = double(axis == Axis::X ? z.j : z.i) / double(n);
      },
      workers);
  SlopeEstimate est;
  est.replicas = reps;
  for (double s : slopes) est.mean += s;
  est.mean /= double(reps);
  double ss = 0.0;
  for (double s : slopes) ss += (s - est.mean) * (s - est.mean);
  est.stderr_ = std::sqrt(ss / double(reps - 1) / double(reps));
  return est;
}

std::pair<double, double> wilson_interval(long k, long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double p = double(k) / double(n), nn = double(n), z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ReturnEstimate transience_probe(const QuadrantModel& model, State state, long max_steps,
                                long reps, std::uint64_t seed, unsigned workers) {
  ReplicaConfig cfg;
  cfg.start = state;
  cfg.max_steps = max_steps;
  cfg.replicas = reps;
  cfg.seed = seed;
  cfg.workers = workers;
  HittingSpec s;
  s.name = "tau(k,l)";
  s.k = state.i;
  s.l = state.j;
  const auto rep = hitting_times(model, {s}, cfg);
  ReturnEstimate est;
  est.replicas = reps;
  est.returned = rep.stats[0].finite;
  est.censored = rep.stats[0].censored;
  est.p = double(est.returned) / double(reps);
  std::tie(est.ci_low, est.ci_high) = wilson_interval(est.returned, reps, 2.5758293035489004);
  return est;
}

}  // namespace quadrant
