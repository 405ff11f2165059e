#pragma once

#include <string>
#include <vector>

#include "quadrant/model.hpp"

namespace quadrant {

/// Kernels of the functional equation at z = 1:
///   Q(x,y)      = x^k0 y^k0 (mu(x,y) - 1)
///   q'_l(x,y)   = x^k0 y^l  (mu'_l(x,y) - 1)
///   q''_k(x,y)  = x^k  y^k0 (mu''_k(x,y) - 1)
///   q_kl(x,y)   = x^k  y^l  (mu_kl(x,y) - 1)
class Kernel {
 public:
  explicit Kernel(const QuadrantModel& model) : model_(&model) {}

  const QuadrantModel& model() const { return *model_; }

  Complex Q(Complex x, Complex y) const;
  /// (dQ/dx, dQ/dy).
  std::pair<Complex, Complex> Q_gradient(Complex x, Complex y) const;
  Complex q_horizontal(int l, Complex x, Complex y) const;
  Complex q_vertical(int k, Complex x, Complex y) const;
  Complex q_corner(int k, int l, Complex x, Complex y) const;

 private:
  const QuadrantModel* model_;
};

/// Nontrivial positive root of Q(x,1) = 0 (Axis::X, gives x1) or Q(1,y) = 0 (Axis::Y, y1).
double one_d_root(const QuadrantModel& model, Axis axis);

/// Analytic branch Y0 with Y0(1) = 1, by Newton continuation along [1, x].
Complex branch_Y0(const QuadrantModel& model, Complex x, int segments = 32);

/// Largest radius delta (halving from 1/2) for which continuation stays on one branch
/// over the circle |x - 1| = delta.
double branch_radius(const QuadrantModel& model);

/// Larger positive root Y1(1 + eps) of Q(1 + eps, y) = 0.
double branch_Y1(const QuadrantModel& model, double eps);

struct BranchDerivatives {
  double a = 0.0;   // Y0'(1)
  double bb = 0.0;  // Y0''(1)
};

/// Closed-form moment expressions for Y0'(1) and Y0''(1).
BranchDerivatives derivatives_at_one(const QuadrantModel& model);
/// Central finite differences of branch_Y0 at 1.
BranchDerivatives derivatives_by_differences(const QuadrantModel& model, double h = 1e-5);

struct CriticalAngle {
  double t0 = 0.0;
  double gamma0 = 0.0;
};

CriticalAngle critical_angle(double x1, double y1);
CriticalAngle critical_angle(const QuadrantModel& model);

/// Bounded-denominator rationality verdict. NoRationalWithin is not a proof of
/// irrationality: it only says no convergent with denominator <= qmax is within tolerance.
struct RationalityVerdict {
  bool rational = false;
  long long p = 0;
  long long q = 1;
  long long qmax = 0;
  double tolerance = 0.0;

  std::string to_string() const;
};

RationalityVerdict classify_t0(double t0, long long qmax = 1'000'000, double tol = 1e-12);

struct TorusReport {
  double min_distance = 0.0;  // min |mu(x,y) - 1| on the grid outside the cap
  double theta = 0.0;         // location of the minimum, x = e^{i theta}
  double phi = 0.0;           // y = e^{i phi}
  bool flagged = false;       // min_distance below flag_threshold
};

/// Sample |mu(e^{i theta}, e^{i phi}) - 1| on a grid_n x grid_n torus grid, skipping the
/// points within `cap` radians of (1,1).
TorusReport torus_check(const QuadrantModel& model, int grid_n, double cap = 0.1,
                        double flag_threshold = 1e-8);

/// Worst margin of (1 + eps) Y1(1 + eps)^t - min(x1, y1^t) over t_grid.
double item8_check(const QuadrantModel& model, double eps, const std::vector<double>& t_grid);

/// Minimum of |mu(x,y) - 1| over |x| = 1 + eps (n_angle points) and
/// Y0(1+eps) < |y| < Y1(1+eps) (n_radius interior radii, n_angle angles each).
double item7_check(const QuadrantModel& model, double eps, int n_angle = 64, int n_radius = 16);

struct KernelOptions {
  long long qmax = 1'000'000;
  double tolerance = 1e-12;
};

struct KernelAnalysis {
  double x1 = 0.0;
  double y1 = 0.0;
  double a = 0.0;  // Y0'(1)
  double b = 0.0;  // Y0''(1) / 2
  double t0 = 0.0;
  double gamma0 = 0.0;
  double y0_radius = 0.0;
  RationalityVerdict verdict;
};

KernelAnalysis analyze_kernel(const QuadrantModel& model, const KernelOptions& options = {});

}  // namespace quadrant
