#pragma once

// Loewner chains as normalized limits of evolution families, and the
// plane-versus-disk range diagnostics.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loewner/evolution.hpp"

namespace loewner {

enum class ChainMode {
  /// f_s(z) = lim phi_{s,t}(z) / phi'_{0,t}(0); needs tau = 0.
  radial,
  /// f_s(z) = lim h_t(phi_{s,t}(z)) / psi'_{0,t}(0) with
  /// h_t(w) = (w - a)/(1 - conj(a) w), a = phi_{0,t}(0).
  mobius,
};

const char* to_string(ChainMode mode) noexcept;
ChainMode chain_mode_from_string(const std::string& name);

struct ChainSettings {
  /// Iterates are taken at t = s + 1, s + 2, ..., s + horizon.
  double horizon = 40.0;
  /// Stop when |increment| <= tolerance * max(1, |iterate|).
  double tolerance = 1e-9;
  ChainMode mode = ChainMode::radial;
};

/// Solver settings used for chain limits unless the caller overrides them.
ode::Settings default_chain_solver();

struct ProfileEntry {
  double t;
  cplx value;
  cplx increment;  // value minus the previous entry (0 for the first)
};

class ChainEvaluator {
 public:
  ChainEvaluator(std::shared_ptr<const EvolutionTrajectory> trajectory, ChainSettings settings = {});
  ChainEvaluator(VectorField field, ChainSettings settings = {}, ode::Settings solver = default_chain_solver());

  /// f_s(z), certified by the successive-difference monitor and corrected
  /// by first-order (geometric tail) acceleration.
  cplx eval(double s, cplx z) const;
  /// The normalized iterate at time t (no limit taken).
  cplx iterate(double s, double t, cplx z) const;

  const EvolutionTrajectory& trajectory() const { return *trajectory_; }
  std::shared_ptr<const EvolutionTrajectory> trajectory_ptr() const { return trajectory_; }
  const ChainSettings& settings() const { return settings_; }
  /// The Moebius mode has no proven rate; its certificates are heuristic.
  bool heuristic() const { return settings_.mode == ChainMode::mobius; }

 private:
  std::shared_ptr<const EvolutionTrajectory> trajectory_;
  ChainSettings settings_;
};

cplx chain_eval(const ChainEvaluator& c, double s, cplx z);

/// Normalized iterates at the given times (observational, no convergence claim).
std::vector<ProfileEntry> chain_convergence_profile(const ChainEvaluator& c, double s, cplx z,
                                                    std::span<const double> times);

enum class RangeVerdict { plane, disk_like, inconclusive };
const char* to_string(RangeVerdict v) noexcept;

struct RangeSettings {
  /// Sampling step for the reported series; integrals use Gauss-Legendre
  /// on each step interval.
  double step = 1.0;
  double divergence_threshold = 10.0;
  double decay_threshold = 1e-3;
  /// Per-unit-time tail increment of the integral counted as converged.
  double tail_threshold = 1e-6;
  ode::Settings solver = default_chain_solver();
};

struct RangeSample {
  double t;
  cplx a;              // phi_{0,t}(0)
  double one_minus_a;  // 1 - |a|^2
  double re_q;         // Re q(0,t)
  double decay;        // |psi'_{0,t}(0)| = |phi'_{0,t}(0)| / (1 - |a|^2)
  double decay_from_q; // exp(-int_0^t Re q)
  double integral;     // int_0^t (1 - |a|^2)
  double nu_ratio;     // |p1'(0,t)| / (2 Re p1(0,t))
};

struct RangeReport {
  double horizon = 0.0;
  double integral_estimate = 0.0;
  double final_decay = 0.0;
  double final_decay_from_q = 0.0;
  /// max relative gap between the two routes to |psi'|
  double route_discrepancy = 0.0;
  double tail_increment = 0.0;
  double max_nu_ratio = 0.0;
  RangeVerdict verdict = RangeVerdict::inconclusive;
  RangeSettings settings;
  std::vector<RangeSample> samples;
  /// Set when p leaves every compact subset of the closed right half-plane on samples.
  bool unbounded_warning = false;
};

RangeReport range_diagnostic(const VectorField& field, double horizon, const RangeSettings& settings = {});

/// p = 1 - i rho' (1 + rho^2)/(1 - rho^2)^2 and tau = i e^{i theta}(1 - i rho)^2/(1 + rho^2).
/// Throws validation if int_0^1 dt/rho looks divergent.
std::pair<HerglotzSpec, DrivingSpec> essential_example_driving(const RhoProfile& rho);

struct DyadicIntegral {
  double value;                 // sum over the computed panels plus geometric tail
  std::vector<double> panels;   // int over [2^{-j-1}, 2^{-j}]
  bool convergent;
};

/// Panel sums of int_0^1 dt/rho over dyadic intervals; the integral is
/// declared divergent when the panel ratios do not settle below 0.95.
DyadicIntegral inverse_rho_integral(const RhoProfile& rho, std::size_t panels = 40);

}  // namespace loewner
