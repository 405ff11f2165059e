#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quadrant/model.hpp"
#include "quadrant/rng.hpp"

namespace quadrant {

struct PathConfig {
  LocalModel::Kind kind = LocalModel::Kind::Full;
  State start;
  long max_steps = 1000;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Step-by-step walker. Step n draws the counter (seed, stream, n).
class PathSimulator {
 public:
  PathSimulator(const QuadrantModel& model, const PathConfig& config);

  State state() const { return state_; }
  long steps() const { return steps_; }
  State next();

 private:
  LocalModel local_;
  CounterRng rng_;
  State state_;
  long steps_ = 0;
};

/// States Z(0), ..., Z(max_steps).
std::vector<State> simulate_path(const QuadrantModel& model, const PathConfig& config);

/// Draw one step from a law given a uniform in [0, 1).
Offset sample_step(const StepDistribution& dist, double u);

/// A hitting time by name: "tau(k,l)", "tau", "tau1(k,l)", "tau1", "T1(k)", "T1k", "Tk",
/// "tau2(k)". k and l are ignored where the name has no parameter.
struct HittingSpec {
  std::string name;
  long k = 0;
  long l = 0;

  /// Parse "tau(3,4)", "T1(2)", "T1k:5", "tau". Throws ValidationError.
  static HittingSpec parse(const std::string& text);
  std::string label() const;
};

struct HittingStat {
  HittingSpec spec;
  long replicas = 0;
  long finite = 0;
  long censored = 0;  // no hit within max_steps
  double mean = 0.0;  // over finite values
  double stderr_ = 0.0;
  std::vector<long> values;  // finite values in replica order
};

struct HittingReport {
  std::vector<HittingStat> stats;
};

struct ReplicaConfig {
  State start;
  long max_steps = 10000;
  long replicas = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 0;        // 0: hardware concurrency
  std::uint64_t first_stream = 0;
};

/// Each replica r runs one walk per needed local model on stream 4 (first_stream + r) + kind.
HittingReport hitting_times(const QuadrantModel& model, const std::vector<HittingSpec>& which,
                            const ReplicaConfig& config);

struct SlopeEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long replicas = 0;
};

/// Y1(n)/n for Z1 (axis X) or X2(n)/n for Z2 (axis Y), started at the origin.
SlopeEstimate fluid_limit_experiment(const QuadrantModel& model, Axis axis, long n, long reps,
                                     std::uint64_t seed, unsigned workers = 0);

struct ReturnEstimate {
  double p = 0.0;          // fraction of replicas returning within max_steps
  double ci_low = 0.0;     // Wilson interval, 99%
  double ci_high = 0.0;
  long returned = 0;
  long censored = 0;       // replicas not seen back by max_steps
  long replicas = 0;
};

ReturnEstimate transience_probe(const QuadrantModel& model, State state, long max_steps,
                                long reps, std::uint64_t seed, unsigned workers = 0);

/// Wilson score interval for k successes out of n at normal quantile z.
std::pair<double, double> wilson_interval(long k, long n, double z);

}  // namespace quadrant
