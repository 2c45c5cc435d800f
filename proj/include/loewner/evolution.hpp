#pragma once

// Herglotz vector fields G(z,t) = (tau - z)(1 - conj(tau) z) p(z,t) and the
// evolution families they generate, dphi/dt = G(phi, t), phi_{s,s} = id.

#include <array>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "loewner/herglotz.hpp"
#include "loewner/ode.hpp"

namespace loewner {

class VectorField {
 public:
  VectorField(DrivingSpec tau, HerglotzSpec p);

  cplx operator()(cplx z, double t) const;
  /// dG/dz = [-(1 - conj(tau) z) - conj(tau)(tau - z)] p + (tau - z)(1 - conj(tau) z) p'.
  cplx derivative(cplx z, double t) const;

  bool radial() const { return tau_.identically_zero(); }
  bool singular_at_zero() const { return tau_.singular_at_zero() || p_.singular_at_zero(); }
  double t_max() const { return p_.t_max(); }
  /// Union of the breakpoints of tau and p.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  const DrivingSpec& driving() const { return tau_; }
  const HerglotzSpec& herglotz() const { return p_; }
  std::string describe() const;

 private:
  DrivingSpec tau_;
  HerglotzSpec p_;
  std::vector<double> breakpoints_;
};

VectorField assemble_vector_field(DrivingSpec tau, HerglotzSpec p);

struct DerivativePair {
  cplx value;
  cplx dz;
};

struct TrajectoryCounters {
  std::size_t arcs_built = 0;
  std::size_t cache_hits = 0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
};

/// Solver handle for one vector field. Dense arcs of (phi, dphi/dz) are
/// cached by (s, z); every query is answered from the arc's canonical step
/// sequence, so results do not depend on cache state. Safe for concurrent use.
class EvolutionTrajectory {
 public:
  /// Barrier: states with |w| >= 1 - kBarrierMargin are rejected.
  static constexpr double kBarrierMargin = 1e-14;
  /// Singular-at-zero fields are integrated in sqrt(t) on [0, kSqrtSwitch].
  static constexpr double kSqrtSwitch = 1.0;

  explicit EvolutionTrajectory(VectorField field, ode::Settings settings = {}, std::size_t cache_capacity = 256);

  cplx evolve_point(double s, double t, cplx z) const;
  DerivativePair evolve_with_derivative(double s, double t, cplx z) const;

  const VectorField& field() const { return field_; }
  const ode::Settings& settings() const { return settings_; }
  TrajectoryCounters counters() const;

 private:
  struct Arc {
    explicit Arc(ode::DenseArc<2> a) : arc(std::move(a)) {}
    std::mutex mutex;
    ode::DenseArc<2> arc;
    ode::ArcStats reported{};
  };
  using Key = std::tuple<double, double, double>;

  std::shared_ptr<Arc> arc_for(double s, cplx z) const;
  void check_query(double s, double t, cplx z) const;

  VectorField field_;
  ode::Settings settings_;
  std::size_t capacity_;
  ode::Rhs<2> rhs_;

  mutable std::mutex cache_mutex_;
  mutable std::map<Key, std::shared_ptr<Arc>> cache_;
  mutable std::deque<Key> order_;
  mutable std::shared_ptr<Arc> pinned_;
  mutable TrajectoryCounters counters_;
};

struct EvolutionSample {
  double s, u, t;
  cplx z;
};

struct AxiomReport {
  /// max |phi_{s,t}(z) - phi_{u,t}(phi_{s,u}(z))|
  double semigroup_defect = 0.0;
  /// max |phi_{s,s}(z) - z| (exactly zero for a correct solver)
  double identity_defect = 0.0;
  /// max |phi_{s,t}(z)| over every computed value
  double max_modulus = 0.0;
  EvolutionSample worst{};
  std::size_t samples = 0;
};

AxiomReport check_evolution_axioms(const EvolutionTrajectory& e, std::span<const EvolutionSample> samples);

struct CenterSample {
  double t;
  cplx a;
};

/// a(t) = phi_{0,t}(0) at t = 0, step, 2 step, ..., t_max.
std::vector<CenterSample> center_trajectory(const EvolutionTrajectory& e, double t_max, double step);

/// Evolution family of G_lambda = (tau - z)(1 - conj(tau) z) p_lambda, built
/// from a base field and the weaker-condition data (k, a).
class LambdaFamily {
 public:
  LambdaFamily(VectorField base, double k, CenterTrajectory a, ode::Settings settings = {});

  /// phi^lambda_{s,t}(z)
  cplx evolve(cplx lambda, double s, double t, cplx z) const;
  std::shared_ptr<const EvolutionTrajectory> trajectory(cplx lambda) const;

  double k() const { return k_; }
  const VectorField& base() const { return base_; }

 private:
  VectorField base_;
  double k_;
  CenterTrajectory a_;
  ode::Settings settings_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const EvolutionTrajectory>> members_;
};

cplx lambda_evolution(const LambdaFamily& family, cplx lambda, double s, double t, cplx z);

/// |CR(z1..z4) - CR(phi(z1)..phi(z4))| for phi = phi_{s,t}.
double cross_ratio_defect(const EvolutionTrajectory& e, double s, double t, std::span<const cplx, 4> z);

struct MotionProbeSettings {
  double circle_radius = 0.25;
  std::size_t circle_points = 16;
  double mobius_tolerance = 1e-8;
};

struct MotionReport {
  double identity_defect = 0.0;      // max |psi_0(z) - z|
  double min_separation = kInf;      // min over lambda and pairs of |psi(z1) - psi(z2)|
  double holomorphy_residual = 0.0;  // circle-mean defect in lambda
  double mobius_defect = 0.0;        // cross-ratio defect of phi^0 at the fit check point
  bool injective = false;
  bool holomorphic = false;
  bool passed = false;
};

/// psi_lambda = (phi^0_{s,t})^{-1} o phi^lambda_{s,t}. phi^0 is fitted as a
/// Moebius map from three images; a cross-ratio defect above the tolerance
/// throws cannot-invert.
MotionReport holomorphic_motion_probe(const LambdaFamily& family, double s, double t,
                                      std::span<const std::pair<cplx, cplx>> pairs,
                                      std::span<const cplx> lambdas, const MotionProbeSettings& settings = {},
                                      double holomorphy_tolerance = 1e-8);

}  // namespace loewner
