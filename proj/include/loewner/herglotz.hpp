#pragma once

// Herglotz functions p(z, t) (holomorphic in z, Re p >= 0), driving points
// tau(t), and the checks built on them: Becker's condition p(D, t) in U(k),
// its hyperbolic-disk relaxation around a centre a(t), and the lambda-slices
// p_lambda = H_t o (lambda/k) H_t^{-1} o p.

#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loewner/core.hpp"

namespace loewner {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Validation slack on Re p >= 0.
inline constexpr double kHerglotzSlack = 1e-10;

/// rho(t) for the explicit non-plane driving example: locally absolutely
/// continuous, rho(0) = 0, 0 <= rho < 1, with closed-form derivative.
struct RhoProfile {
  std::string name;
  std::function<double(double)> rho;
  std::function<double(double)> drho;

  /// rho(t) = tanh(sqrt t).
  static RhoProfile tanh_sqrt();
  /// rho(t) = sqrt t / (1 + sqrt t).
  static RhoProfile sqrt_ratio();
  static RhoProfile by_name(const std::string& name);
};

// ---------------------------------------------------------------------------
// Herglotz functions

class HerglotzModel {
 public:
  virtual ~HerglotzModel() = default;
  virtual cplx value(cplx z, double t) const = 0;
  /// dp/dz. Default: fourth-order central differences.
  virtual cplx derivative(cplx z, double t) const;
  /// Upper end of the time domain (inclusive).
  virtual double t_max() const { return kInf; }
  /// Interior discontinuities in t, sorted.
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual bool singular_at_zero() const { return false; }
  virtual std::string kind() const = 0;
  virtual std::string describe() const = 0;
};

class HerglotzSpec {
 public:
  explicit HerglotzSpec(std::shared_ptr<const HerglotzModel> model);

  static HerglotzSpec constant(cplx c);
  /// Catalog "koebe": p = (1 - k z^n) / (1 + k z^n), the Herglotz function of
  /// the chain e^t z / (1 - k z^n)^{2/n}.
  static HerglotzSpec koebe(double k, int n = 1);
  /// Catalog "cayley": p = (1 + z) / (1 - z).
  static HerglotzSpec cayley();
  /// Catalog "essential-example": p = 1 - i rho' (1 + rho^2) / (1 - rho^2)^2.
  static HerglotzSpec essential_example(RhoProfile rho);
  /// Ratio of polynomials with coefficients in increasing degree.
  static HerglotzSpec rational(std::vector<cplx> numerator, std::vector<cplx> denominator);
  /// Piece i is active on [starts[i], starts[i+1]); starts[0] must be 0.
  /// The last piece runs to t_max.
  static HerglotzSpec piecewise(std::vector<double> starts, std::vector<HerglotzSpec> pieces, double t_max = kInf);

  /// Unchecked evaluation (hot path for the integrator).
  cplx operator()(cplx z, double t) const { return model_->value(z, t); }
  cplx derivative(cplx z, double t) const { return model_->derivative(z, t); }

  double t_max() const { return model_->t_max(); }
  std::vector<double> breakpoints() const { return model_->breakpoints(); }
  bool singular_at_zero() const { return model_->singular_at_zero(); }
  std::string kind() const { return model_->kind(); }
  std::string describe() const { return model_->describe(); }
  const HerglotzModel& model() const { return *model_; }

 private:
  std::shared_ptr<const HerglotzModel> model_;
};

/// Checked evaluation: |z| < 1 and t within the spec's time domain.
cplx eval_herglotz(const HerglotzSpec& p, cplx z, double t);

// ---------------------------------------------------------------------------
// Driving points tau : [0, inf) -> closed unit disk

class DrivingModel {
 public:
  virtual ~DrivingModel() = default;
  virtual cplx value(double t) const = 0;
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual bool singular_at_zero() const { return false; }
  /// True when tau vanishes identically (radial fields).
  virtual bool identically_zero() const { return false; }
  virtual std::string describe() const = 0;
};

class DrivingSpec {
 public:
  explicit DrivingSpec(std::shared_ptr<const DrivingModel> model);

  static DrivingSpec constant(cplx c);
  /// tau(t) = r e^{i omega t}.
  static DrivingSpec rotating(double r, double omega);
  /// Piecewise constant: values[i] on [starts[i], starts[i+1]), last to infinity.
  static DrivingSpec table(std::vector<double> starts, std::vector<cplx> values);
  /// tau(t) = i e^{i theta(t)} (1 - i rho)^2 / (1 + rho^2) with
  /// theta(t) = int_0^t (1 - rho^2)^2 / (1 + rho^2) ds / rho.
  static DrivingSpec essential_example(RhoProfile rho);
  static DrivingSpec closed_form(std::string name, std::function<cplx(double)> tau);

  cplx operator()(double t) const { return model_->value(t); }
  std::vector<double> breakpoints() const { return model_->breakpoints(); }
  bool singular_at_zero() const { return model_->singular_at_zero(); }
  bool identically_zero() const { return model_->identically_zero(); }
  std::string describe() const { return model_->describe(); }

  /// Throws a validation error if |tau(t)| > 1 at any of the times.
  void validate(std::span<const double> times, double tol = Tolerance::algebraic) const;

 private:
  std::shared_ptr<const DrivingModel> model_;
};

/// theta(t) for the essential example, by cumulative Gauss-Legendre panels in
/// u = sqrt(s); the substitution removes the 1/rho endpoint singularity.
class EssentialAngle {
 public:
  explicit EssentialAngle(RhoProfile rho);
  double operator()(double t) const;

 private:
  double integrand(double u) const;
  double panel(double u0, double u1, bool first) const;

  RhoProfile rho_;
  static constexpr double kPanel = 1.0 / 16.0;
  mutable std::mutex mutex_;
  mutable std::vector<double> cumulative_{0.0};
};

// ---------------------------------------------------------------------------
// Hyperbolic-disk centres a(t) in the closed right half-plane

class CenterTrajectory {
 public:
  static CenterTrajectory constant(cplx a);
  static CenterTrajectory closed_form(std::string name, std::function<cplx(double)> a);

  cplx operator()(double t) const;
  std::string describe() const { return name_; }
  /// Becker-disk radius artanh(k).
  static double radius(double k) { return hyperbolic_radius(k); }

 private:
  CenterTrajectory(std::string name, std::function<cplx(double)> a) : name_(std::move(name)), a_(std::move(a)) {}
  std::string name_;
  std::function<cplx(double)> a_;
};

// ---------------------------------------------------------------------------
// Condition checks

struct ConditionReport {
  bool satisfied = true;
  /// Max over samples of (violated quantity - bound).
  double worst_margin = -kInf;
  cplx worst_z{};
  double worst_t = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;
};

/// Sampling of D x [0, T]. Times exactly in `exceptions` are skipped
/// (the finite exceptional set of an a.e. statement).
struct Sampling {
  std::vector<double> radii{0.5, 0.9, 0.99, 0.999};
  std::size_t angles = 64;
  std::vector<double> times;
  std::vector<double> exceptions;

  /// Default grid: 4 radii x 64 angles x `time_count` midpoint times on [0, t_hi].
  static Sampling standard(double t_hi = 4.0, std::size_t time_count = 32);
  /// Standard sampling clipped to the spec's time domain.
  static Sampling for_spec(const HerglotzSpec& p);

  bool excluded(double t) const;
};

/// margin = |(p - 1)/(p + 1)| - k.
ConditionReport check_becker_condition(const HerglotzSpec& p, double k, const Sampling& sampling,
                                       double tolerance = Tolerance::algebraic);

/// margin = d_H(p, a(t)) - artanh(k) when Re a(t) > 0, |p - a(t)| otherwise.
ConditionReport check_weaker_condition(const HerglotzSpec& p, double k, const CenterTrajectory& a,
                                       const Sampling& sampling, double tolerance = Tolerance::algebraic);

/// Re p >= -1e-10 on samples and the circle-mean holomorphy probe below
/// `holo_tol` (16 points on radius-0.01 circles).
ConditionReport validate_herglotz(const HerglotzSpec& p, const Sampling& sampling, double holo_tol = 1e-10);

/// |mean of f over `count` points on the circle |w - center| = radius - f(center)|.
double circle_mean_defect(const std::function<cplx(cplx)>& f, cplx center, double radius, std::size_t count = 16);

struct LambdaSliceOptions {
  /// Set when |lambda| > k: containment is no longer guaranteed.
  bool beyond_guarantee = false;
};

/// p_lambda(., t) = H_t((lambda/k) H_t^{-1}(p(., t))) where Re a(t) > 0 and
/// p(., t) otherwise. For k = 0 this is the constant a(t).
HerglotzSpec lambda_slice(const HerglotzSpec& p, double k, const CenterTrajectory& a, cplx lambda,
                          LambdaSliceOptions* flags = nullptr);

struct PointSample {
  cplx z;
  double t;
};

/// max over samples of (1 - |z|^2)|p'(z)| - 2 Re p(z). Non-positive for any
/// Herglotz function (Schwarz-Pick in the half-plane).
double schwarz_pick_residual(const HerglotzSpec& p, std::span<const PointSample> samples);

/// Polar disk samples (radii x angles) at each time.
std::vector<PointSample> disk_samples(std::span<const double> radii, std::size_t angles,
                                      std::span<const double> times);

}  // namespace loewner
