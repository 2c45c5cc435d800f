#include "loewner/chains.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace loewner {

const char* to_string(ChainMode mode) noexcept { return mode == ChainMode::radial ? "radial" : "mobius"; }

ChainMode chain_mode_from_string(const std::string& name) {
  if (name == "radial") return ChainMode::radial;
  if (name == "mobius") return ChainMode::mobius;
  fail(ErrorKind::validation, "unknown chain mode '" + name + "' (expected radial or mobius)");
}

ode::Settings default_chain_solver() {
  ode::Settings s;
  s.rtol = 1e-10;
  s.atol = 0.0;
  return s;
}

ChainEvaluator::ChainEvaluator(std::shared_ptr<const EvolutionTrajectory> trajectory, ChainSettings settings)
    : trajectory_(std::move(trajectory)), settings_(settings) {
  if (!trajectory_) fail(ErrorKind::validation, "chain evaluator needs a trajectory");
  if (!(settings_.horizon >= 2.0)) fail(ErrorKind::validation, "chain horizon must be at least 2");
  if (!(settings_.tolerance > 0.0)) fail(ErrorKind::validation, "chain tolerance must be positive");
  if (settings_.mode == ChainMode::radial && !trajectory_->field().radial()) {
    fail(ErrorKind::validation, "radial chain mode needs tau = 0");
  }
}

ChainEvaluator::ChainEvaluator(VectorField field, ChainSettings settings, ode::Settings solver)
    : ChainEvaluator(std::make_shared<const EvolutionTrajectory>(std::move(field), solver), settings) {}

cplx ChainEvaluator::iterate(double s, double t, cplx z) const {
  const EvolutionTrajectory& e = *trajectory_;
  const DerivativePair base = e.evolve_with_derivative(0.0, t, 0.0);
  const cplx w = e.evolve_point(s, t, z);
  if (settings_.mode == ChainMode::radial) return w / base.dz;
  const cplx a = base.value;
  const double one_minus = 1.0 - std::norm(a);
  const cplx h = (w - a) / (1.0 - std::conj(a) * w);
  return h * one_minus / base.dz;
}

cplx ChainEvaluator::eval(double s, cplx z) const {
  const auto steps = static_cast<std::size_t>(std::floor(settings_.horizon));
  cplx prev = iterate(s, s + 1.0, z);
  cplx prev_inc{};
  for (std::size_t j = 2; j <= steps; ++j) {
    const cplx x = iterate(s, s + static_cast<double>(j), z);
    const cplx inc = x - prev;
    if (std::abs(inc) <= settings_.tolerance * std::max(1.0, std::abs(x))) {
      if (prev_inc != cplx(0.0, 0.0) && inc != cplx(0.0, 0.0)) {
        const cplx q = inc / prev_inc;
        if (std::abs(q) <= 0.9) return x + inc * q / (1.0 - q);
      }
      return x;
    }
    prev_inc = inc;
    prev = x;
  }
  const cplx last = prev;
  fail(ErrorKind::convergence, "chain limit did not converge within the horizon",
       {{"horizon", settings_.horizon},
        {"last_re", last.real()},
        {"last_im", last.imag()},
        {"previous_re", (last - prev_inc).real()},
        {"previous_im", (last - prev_inc).imag()},
        {"increment", std::abs(prev_inc)}});
}

cplx chain_eval(const ChainEvaluator& c, double s, cplx z) { return c.eval(s, z); }

std::vector<ProfileEntry> chain_convergence_profile(const ChainEvaluator& c, double s, cplx z,
                                                    std::span<const double> times) {
  std::vector<ProfileEntry> out;
  out.reserve(times.size());
  for (double t : times) {
    const cplx v = c.iterate(s, t, z);
    out.push_back({t, v, out.empty() ? cplx{} : v - out.back().value});
  }
  return out;
}

// -----------------------------------------------------------------------------

const char* to_string(RangeVerdict v) noexcept {
  switch (v) {
    case RangeVerdict::plane: return "plane";
    case RangeVerdict::disk_like: return "disk-like";
    case RangeVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

struct RangePoint {
  cplx a;
  cplx dz;
  double one_minus;
  double re_q;
  double nu_ratio;
  double abs_p;
};

RangePoint range_point(const EvolutionTrajectory& e, double t) {
  const VectorField& field = e.field();
  const DerivativePair base = e.evolve_with_derivative(0.0, t, 0.0);
  const cplx a = base.value;
  const double one_minus = 1.0 - std::norm(a);
  const cplx tau = field.driving()(t);
  const cplx kappa = (tau - a) / (1.0 - std::conj(a) * tau);
  const cplx p1 = field.herglotz()(a, t);
  const cplx dp1 = field.herglotz().derivative(a, t) * one_minus;
  const double den = std::norm(1.0 + std::conj(a) * kappa);
  const double re_q = one_minus / den * ((1.0 + std::norm(kappa)) * p1 - kappa * dp1).real();
  const double nu = p1.real() > 0.0 ? std::abs(dp1) / (2.0 * p1.real()) : kInf;
  return {a, base.dz, one_minus, re_q, nu, std::abs(p1)};
}

}  // namespace

RangeReport range_diagnostic(const VectorField& field, double horizon, const RangeSettings& settings) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorKind::validation, "range horizon must be finite and > 0");
  if (!(settings.step > 0.0)) fail(ErrorKind::validation, "range step must be positive");
  const EvolutionTrajectory e(field, settings.solver);

  RangeReport report;
  report.horizon = horizon;
  report.settings = settings;

  using Gauss = boost::math::quadrature::gauss<double, 10>;
  double integral = 0.0, q_integral = 0.0, t_prev = 0.0;
  double max_abs_p = 0.0;
  report.samples.push_back({0.0, 0.0, 1.0, range_point(e, 0.0).re_q, 1.0, 1.0, 0.0, 0.0});
  const auto count = static_cast<std::size_t>(std::ceil(horizon / settings.step - 1e-9));
  for (std::size_t j = 1; j <= count; ++j) {
    const double t = std::min(horizon, settings.step * static_cast<double>(j));
    integral += Gauss::integrate([&](double u) { return range_point(e, u).one_minus; }, t_prev, t);
    q_integral += Gauss::integrate([&](double u) { return range_point(e, u).re_q; }, t_prev, t);
    const RangePoint pt = range_point(e, t);
    RangeSample smp;
    smp.t = t;
    smp.a = pt.a;
    smp.one_minus_a = pt.one_minus;
    smp.re_q = pt.re_q;
    smp.decay = std::abs(pt.dz) / pt.one_minus;
    smp.decay_from_q = std::exp(-q_integral);
    smp.integral = integral;
    smp.nu_ratio = pt.nu_ratio;
    report.samples.push_back(smp);
    report.route_discrepancy =
        std::max(report.route_discrepancy, std::abs(smp.decay - smp.decay_from_q) / std::max(smp.decay, 1e-300));
    report.max_nu_ratio = std::max(report.max_nu_ratio, pt.nu_ratio);
    max_abs_p = std::max(max_abs_p, pt.abs_p);
    t_prev = t;
  }

  const RangeSample& last = report.samples.back();
  report.integral_estimate = integral;
  report.final_decay = last.decay;
  report.final_decay_from_q = last.decay_from_q;
  report.tail_increment = last.one_minus_a;
  report.unbounded_warning = max_abs_p > 1e3;

  if (integral > settings.divergence_threshold && last.decay < settings.decay_threshold) {
    report.verdict = RangeVerdict::plane;
  } else if (report.tail_increment < settings.tail_threshold && last.decay > settings.decay_threshold) {
    report.verdict = RangeVerdict::disk_like;
  } else {
    report.verdict = RangeVerdict::inconclusive;
  }
  return report;
}

// -----------------------------------------------------------------------------

DyadicIntegral inverse_rho_integral(const RhoProfile& rho, std::size_t panels) {
  using Gauss = boost::math::quadrature::gauss<double, 15>;
  DyadicIntegral out{0.0, {}, false};
  double hi = 1.0;
  for (std::size_t j = 0; j < panels; ++j) {
    const double lo = hi / 2.0;
    const double v = Gauss::integrate([&](double t) { return 1.0 / rho.rho(t); }, lo, hi);
    if (!std::isfinite(v)) return out;
    out.panels.push_back(v);
    out.value += v;
    hi = lo;
  }
  const std::size_t n = out.panels.size();
  bool settled = n >= 4;
  for (std::size_t i = n - 3; settled && i < n; ++i) settled = out.panels[i] < 0.95 * out.panels[i - 1];
  if (settled) {
    const double r = out.panels[n - 1] / out.panels[n - 2];
    out.value += out.panels[n - 1] * r / (1.0 - r);
    out.convergent = true;
  }
  return out;
}

std::pair<HerglotzSpec, DrivingSpec> essential_example_driving(const RhoProfile& rho) {
  for (double t : {0.25, 1.0, 4.0}) {
    const double r = rho.rho(t);
    if (!(r >= 0.0 && r < 1.0)) fail(ErrorKind::validation, "rho must take values in [0, 1)", {{"t", t}, {"rho", r}});
  }
  const DyadicIntegral check = inverse_rho_integral(rho);
  if (!check.convergent) {
    fail(ErrorKind::validation, "invalid rho: int_0^1 dt/rho diverges",
         {{"partial_sum", check.value}, {"panels", static_cast<double>(check.panels.size())}});
  }
  return {HerglotzSpec::essential_example(rho), DrivingSpec::essential_example(rho)};
}

}  // namespace loewner
