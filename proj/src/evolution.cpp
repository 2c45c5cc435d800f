#include "loewner/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace loewner {

VectorField::VectorField(DrivingSpec tau, HerglotzSpec p) : tau_(std::move(tau)), p_(std::move(p)) {
  breakpoints_ = tau_.breakpoints();
  const auto more = p_.breakpoints();
  breakpoints_.insert(breakpoints_.end(), more.begin(), more.end());
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

cplx VectorField::operator()(cplx z, double t) const {
  const cplx tau = tau_(t);
  return (tau - z) * (1.0 - std::conj(tau) * z) * p_(z, t);
}

cplx VectorField::derivative(cplx z, double t) const {
  const cplx tau = tau_(t);
  const cplx tb = std::conj(tau);
  const cplx a = tau - z, b = 1.0 - tb * z;
  return (-b - tb * a) * p_(z, t) + a * b * p_.derivative(z, t);
}

std::string VectorField::describe() const { return "tau=" + tau_.describe() + ";p=" + p_.describe(); }

VectorField assemble_vector_field(DrivingSpec tau, HerglotzSpec p) { return {std::move(tau), std::move(p)}; }

// -----------------------------------------------------------------------------

EvolutionTrajectory::EvolutionTrajectory(VectorField field, ode::Settings settings, std::size_t cache_capacity)
    : field_(std::move(field)), settings_(settings), capacity_(std::max<std::size_t>(cache_capacity, 1)) {
  if (!(settings_.rtol > 0.0) || !(settings_.atol >= 0.0) || !(settings_.max_step > 0.0) ||
      !(settings_.min_step > 0.0)) {
    fail(ErrorKind::validation, "solver settings out of range");
  }
  rhs_ = [this](double t, const ode::State<2>& y) -> ode::State<2> {
    return {field_(y[0], t), field_.derivative(y[0], t) * y[1]};
  };
}

void EvolutionTrajectory::check_query(double s, double t, cplx z) const {
  if (!(s >= 0.0)) fail(ErrorKind::domain, "start time must be non-negative", {{"s", s}});
  if (!(t >= s)) fail(ErrorKind::domain, "backward evolution (t < s) is not supported", {{"s", s}, {"t", t}});
  if (!(std::abs(z) < 1.0)) fail(ErrorKind::domain, "evolution needs |z| < 1", {{"abs_z", std::abs(z)}});
  if (t > field_.t_max()) {
    fail(ErrorKind::extrapolation, "time beyond the field's domain", {{"t", t}, {"t_max", field_.t_max()}});
  }
}

std::shared_ptr<EvolutionTrajectory::Arc> EvolutionTrajectory::arc_for(double s, cplx z) const {
  const Key key{s, z.real(), z.imag()};
  std::lock_guard lock(cache_mutex_);
  if (pinned_ && s == 0.0 && z == cplx(0.0, 0.0)) {
    ++counters_.cache_hits;
    return pinned_;
  }
  if (auto it = cache_.find(key); it != cache_.end()) {
    ++counters_.cache_hits;
    return it->second;
  }
  ode::Policy<2> policy;
  policy.settings = settings_;
  if (!field_.breakpoints().empty()) {
    const auto* bps = &field_.breakpoints();
    policy.next_breakpoint = [bps](double t) -> std::optional<double> {
      auto it = std::upper_bound(bps->begin(), bps->end(), t);
      if (it == bps->end()) return std::nullopt;
      return *it;
    };
  }
  policy.admissible = [](const ode::State<2>& y) { return std::abs(y[0]) < 1.0 - kBarrierMargin; };
  if (field_.singular_at_zero() && s < kSqrtSwitch) policy.sqrt_switch = kSqrtSwitch;

  auto arc = std::make_shared<Arc>(ode::DenseArc<2>(s, {z, cplx(1.0, 0.0)}, std::move(policy)));
  ++counters_.arcs_built;
  // The arc from (0, 0) normalizes every chain iterate; it is never evicted.
  if (s == 0.0 && z == cplx(0.0, 0.0)) {
    pinned_ = arc;
    return arc;
  }
  cache_.emplace(key, arc);
  order_.push_back(key);
  while (cache_.size() > capacity_) {
    cache_.erase(order_.front());
    order_.pop_front();
  }
  return arc;
}

DerivativePair EvolutionTrajectory::evolve_with_derivative(double s, double t, cplx z) const {
  check_query(s, t, z);
  if (t == s) return {z, 1.0};
  auto arc = arc_for(s, z);
  ode::State<2> y;
  {
    std::lock_guard lock(arc->mutex);
    arc->arc.extend_to(t, rhs_);
    y = arc->arc.at(t);
    const auto& st = arc->arc.stats();
    std::lock_guard counters_lock(cache_mutex_);
    counters_.accepted_steps += st.accepted - arc->reported.accepted;
    counters_.rejected_steps += st.rejected - arc->reported.rejected;
    counters_.rhs_evaluations += st.rhs_evaluations - arc->reported.rhs_evaluations;
    arc->reported = st;
  }
  if (!(std::abs(y[0]) < 1.0)) {
    fail(ErrorKind::barrier, "computed value left the unit disk", {{"t", t}, {"abs_value", std::abs(y[0])}});
  }
  return {y[0], y[1]};
}

cplx EvolutionTrajectory::evolve_point(double s, double t, cplx z) const {
  return evolve_with_derivative(s, t, z).value;
}

TrajectoryCounters EvolutionTrajectory::counters() const {
  std::lock_guard lock(cache_mutex_);
  return counters_;
}

// -----------------------------------------------------------------------------

AxiomReport check_evolution_axioms(const EvolutionTrajectory& e, std::span<const EvolutionSample> samples) {
  AxiomReport report;
  for (const auto& smp : samples) {
    const cplx direct = e.evolve_point(smp.s, smp.t, smp.z);
    const cplx mid = e.evolve_point(smp.s, smp.u, smp.z);
    const cplx composed = e.evolve_point(smp.u, smp.t, mid);
    const double defect = std::abs(direct - composed);
    if (defect > report.semigroup_defect || report.samples == 0) {
      report.semigroup_defect = std::max(report.semigroup_defect, defect);
      report.worst = smp;
    }
    report.identity_defect = std::max(report.identity_defect, std::abs(e.evolve_point(smp.s, smp.s, smp.z) - smp.z));
    report.max_modulus = std::max({report.max_modulus, std::abs(direct), std::abs(mid), std::abs(composed)});
    ++report.samples;
  }
  return report;
}

std::vector<CenterSample> center_trajectory(const EvolutionTrajectory& e, double t_max, double step) {
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) fail(ErrorKind::validation, "t_max must be finite and >= 0");
  if (!(step > 0.0)) fail(ErrorKind::validation, "step must be positive");
  std::vector<CenterSample> out;
  const auto count = static_cast<std::size_t>(std::floor(t_max / step + 1e-9));
  out.reserve(count + 1);
  for (std::size_t j = 0; j <= count; ++j) {
    const double t = std::min(t_max, step * static_cast<double>(j));
    out.push_back({t, e.evolve_point(0.0, t, 0.0)});
  }
  return out;
}

// -----------------------------------------------------------------------------

LambdaFamily::LambdaFamily(VectorField base, double k, CenterTrajectory a, ode::Settings settings)
    : base_(std::move(base)), k_(k), a_(std::move(a)), settings_(settings) {
  if (!(k >= 0.0 && k < 1.0)) fail(ErrorKind::validation, "k must lie in [0, 1)", {{"k", k}});
}

std::shared_ptr<const EvolutionTrajectory> LambdaFamily::trajectory(cplx lambda) const {
  const std::pair<double, double> key{lambda.real(), lambda.imag()};
  std::lock_guard lock(mutex_);
  if (auto it = members_.find(key); it != members_.end()) return it->second;
  HerglotzSpec p = lambda_slice(base_.herglotz(), k_, a_, lambda);
  auto traj = std::make_shared<const EvolutionTrajectory>(VectorField(base_.driving(), std::move(p)), settings_);
  members_.emplace(key, traj);
  return traj;
}

cplx LambdaFamily::evolve(cplx lambda, double s, double t, cplx z) const {
  return trajectory(lambda)->evolve_point(s, t, z);
}

cplx lambda_evolution(const LambdaFamily& family, cplx lambda, double s, double t, cplx z) {
  return family.evolve(lambda, s, t, z);
}

double cross_ratio_defect(const EvolutionTrajectory& e, double s, double t, std::span<const cplx, 4> z) {
  std::array<cplx, 4> w;
  for (std::size_t i = 0; i < 4; ++i) w[i] = e.evolve_point(s, t, z[i]);
  return std::abs(cross_ratio(z[0], z[1], z[2], z[3]) - cross_ratio(w[0], w[1], w[2], w[3]));
}

MotionReport holomorphic_motion_probe(const LambdaFamily& family, double s, double t,
                                      std::span<const std::pair<cplx, cplx>> pairs, std::span<const cplx> lambdas,
                                      const MotionProbeSettings& settings, double holomorphy_tolerance) {
  const auto zero = family.trajectory(0.0);
  const std::array<cplx, 3> fit_points{cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.5)};
  std::array<cplx, 3> fit_images;
  for (std::size_t i = 0; i < 3; ++i) fit_images[i] = zero->evolve_point(s, t, fit_points[i]);
  const MobiusTransform phi0 = MobiusTransform::from_three_points(fit_points, fit_images);

  MotionReport report;
  const std::array<cplx, 4> check{fit_points[0], fit_points[1], fit_points[2], cplx(-0.4, -0.3)};
  report.mobius_defect = cross_ratio_defect(*zero, s, t, check);
  if (!(report.mobius_defect <= settings.mobius_tolerance)) {
    fail(ErrorKind::cannot_invert, "lambda = 0 flow is not Moebius within tolerance",
         {{"cross_ratio_defect", report.mobius_defect}});
  }
  const MobiusTransform inv = phi0.inverse();
  auto psi = [&](cplx lambda, cplx z) { return inv.eval(family.evolve(lambda, s, t, z)); };

  std::vector<cplx> points;
  for (const auto& [z1, z2] : pairs) {
    points.push_back(z1);
    points.push_back(z2);
  }
  for (cplx z : points) report.identity_defect = std::max(report.identity_defect, std::abs(psi(0.0, z) - z));

  for (cplx lambda : lambdas) {
    for (const auto& [z1, z2] : pairs) {
      report.min_separation = std::min(report.min_separation, std::abs(psi(lambda, z1) - psi(lambda, z2)));
    }
  }
  for (cplx z : points) {
    cplx mean{};
    for (std::size_t j = 0; j < settings.circle_points; ++j) {
      const cplx lambda =
          std::polar(settings.circle_radius, kTwoPi * static_cast<double>(j) / static_cast<double>(settings.circle_points));
      mean += psi(lambda, z);
    }
    mean /= static_cast<double>(settings.circle_points);
    report.holomorphy_residual = std::max(report.holomorphy_residual, std::abs(mean - psi(0.0, z)));
  }
  report.injective = report.min_separation > 0.0;
  report.holomorphic = report.holomorphy_residual <= holomorphy_tolerance;
  report.passed = report.injective && report.holomorphic && report.identity_defect <= 1e-10;
  return report;
}

}  // namespace loewner
