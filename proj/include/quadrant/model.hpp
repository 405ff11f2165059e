#pragma once

#include <array>
#include <compare>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace quadrant {

using Complex = std::complex<double>;
using Fraction = boost::rational<std::int64_t>;

/// Lattice jump (i' - i, j' - j).
struct Offset {
  int di = 0;
  int dj = 0;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

struct State {
  long i = 0;
  long j = 0;
  friend auto operator<=>(const State&, const State&) = default;
};

/// Coordinate selector. X pairs with the induced chain X1, the root x1 and the speed V1;
/// Y pairs with Y2, y1 and V2.
enum class Axis { X, Y };

inline const char* to_string(Axis a) { return a == Axis::X ? "x" : "y"; }

struct DriftVector {
  double m1 = 0.0;
  double m2 = 0.0;
};

/// One-dimensional jump law: (jump, probability) pairs sorted by jump.
struct JumpLaw {
  std::vector<std::pair<int, double>> jumps;

  double mean() const;
  double total() const;
  int min_jump() const;
  int max_jump() const;
  /// Sum p x^d.
  double symbol(double x) const;
  double symbol_derivative(double x) const;
};

/// Finite probability measure on Z^2.
class StepDistribution {
 public:
  struct Entry {
    Offset step;
    double p = 0.0;
    std::optional<Fraction> exact;  // set when the mass was given as an exact rational
  };

  StepDistribution() = default;
  /// Duplicate offsets are merged; entries are kept sorted by offset.
  explicit StepDistribution(std::vector<Entry> entries);

  static StepDistribution from_masses(std::initializer_list<std::tuple<int, int, double>> masses);
  /// Convex combination lambda * a + (1 - lambda) * b.
  static StepDistribution mixture(const StepDistribution& a, const StepDistribution& b,
                                  double lambda);

  std::span<const Entry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double total_mass() const;
  /// Exact sum when every entry carries an exact rational.
  std::optional<Fraction> exact_total() const;
  double mass(Offset step) const;
  double min_positive_mass() const;
  /// Componentwise bounds of the support (entries with positive mass).
  Offset support_min() const;
  Offset support_max() const;

  /// Symbol sum p x^di y^dj.
  Complex symbol(Complex x, Complex y) const;
  /// Partial derivatives of the symbol: d/dx, d/dy.
  std::pair<Complex, Complex> symbol_gradient(Complex x, Complex y) const;

  /// Law of di (Axis::X) or dj (Axis::Y).
  JumpLaw marginal(Axis axis) const;
  /// Swap the roles of the two coordinates.
  StepDistribution transposed() const;

 private:
  std::vector<Entry> entries_;
};

DriftVector drift(const StepDistribution& dist);

/// Laplace transform of the increments, R(alpha) = sum p exp(alpha1 di + alpha2 dj).
double moment_transform(const StepDistribution& dist, std::array<double, 2> alpha);

/// Homogeneity domains of the quadrant.
enum class Domain { Interior, HorizontalStrip, VerticalStrip, Corner };

/// Reflected walk on N^2 with k0-wide boundary strips.
///
/// horizontal(j) is the law used on N x {j} for i >= k0 (j < k0), vertical(i) the law on
/// {i} x N for j >= k0 (i < k0), corner(i, j) the law at the corner states.
class QuadrantModel {
 public:
  QuadrantModel(int k0, StepDistribution interior, std::vector<StepDistribution> horizontal,
                std::vector<StepDistribution> vertical, std::vector<StepDistribution> corner);

  int k0() const { return k0_; }
  const StepDistribution& interior() const { return interior_; }
  const StepDistribution& horizontal(int j) const { return horizontal_.at(j); }
  const StepDistribution& vertical(int i) const { return vertical_.at(i); }
  const StepDistribution& corner(int i, int j) const { return corner_.at(i * k0_ + j); }

  Domain domain(long i, long j) const;
  /// Transition law out of (i, j) in N^2.
  const StepDistribution& at(long i, long j) const;

  /// Mirror x <-> y; the result is again a quadrant model.
  QuadrantModel transposed() const;

  /// Stable FNV-1a hash of the model content.
  std::uint64_t hash() const;

  /// Short human-readable name, if one was attached by the loader.
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

 private:
  int k0_;
  StepDistribution interior_;
  std::vector<StepDistribution> horizontal_;
  std::vector<StepDistribution> vertical_;
  std::vector<StepDistribution> corner_;
  std::string name_;
};

/// Local walks Z0 (Z^2), Z1 (N x Z), Z2 (Z x N) and Z itself, as a view over a model.
class LocalModel {
 public:
  enum class Kind { Full, Z0, Z1, Z2 };

  LocalModel(const QuadrantModel& model, Kind kind) : model_(&model), kind_(kind) {}

  Kind kind() const { return kind_; }
  const QuadrantModel& model() const { return *model_; }
  const StepDistribution& at(long i, long j) const;
  /// Whether (i, j) belongs to the state space of this walk.
  bool contains(long i, long j) const;

 private:
  const QuadrantModel* model_;
  Kind kind_;
};

/// One-coordinate chain X1 (axis X, from Z1) or Y2 (axis Y, from Z2).
class InducedChain {
 public:
  InducedChain(Axis axis, std::vector<JumpLaw> boundary, JumpLaw interior);

  Axis axis() const { return axis_; }
  int k0() const { return static_cast<int>(boundary_.size()); }
  const JumpLaw& law(long k) const;
  const JumpLaw& interior() const { return interior_; }
  /// Transition row out of state k as (target, probability).
  std::vector<std::pair<long, double>> row(long k) const;

 private:
  Axis axis_;
  std::vector<JumpLaw> boundary_;
  JumpLaw interior_;
};

InducedChain induced_chain(const QuadrantModel& model, Axis axis);

/// Pass/fail list produced by validation. Failures are entries, never exceptions.
struct ModelReport {
  struct Check {
    std::string name;
    bool passed = true;
    std::string message;
    bool heuristic = false;
  };
  std::vector<Check> checks;

  void add(std::string name, bool passed, std::string message, bool heuristic = false);
  bool ok() const;
  /// All checks except the drift / speed assumptions.
  bool structural_ok() const;
  const Check* find(const std::string& name) const;
  std::string to_text() const;
};

struct ValidationOptions {
  double tolerance = 1e-12;
  /// Side of the irreducibility window; 0 selects 3 k0 + 10.
  int window = 0;
};

ModelReport validate_model(const QuadrantModel& model, const ValidationOptions& options = {});

}  // namespace quadrant
