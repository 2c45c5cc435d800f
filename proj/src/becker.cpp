#include "loewner/becker.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "loewner/parallel.hpp"

namespace loewner {

BeltramiField BeltramiField::from_traces(std::vector<double> radii, std::vector<std::vector<cplx>> traces, bool exact,
                                         double error_estimate) {
  if (radii.empty() || radii.size() != traces.size()) {
    fail(ErrorKind::validation, "Beltrami field needs one trace per radius");
  }
  BeltramiField f;
  f.angular_count = traces.front().size();
  if (!is_power_of_two(f.angular_count)) {
    fail(ErrorKind::validation, "trace length must be a power of two", {{"n", static_cast<double>(f.angular_count)}});
  }
  for (const auto& tr : traces) {
    if (tr.size() != f.angular_count) fail(ErrorKind::validation, "all traces must have the same length");
    for (cplx m : tr) {
      f.max_dilatation = std::max(f.max_dilatation, std::abs(m));
      f.min_jacobian_ratio = std::min(f.min_jacobian_ratio, 1.0 - std::norm(m));
    }
  }
  f.jacobian_sign_ok = f.min_jacobian_ratio > 0.0;
  f.radii = std::move(radii);
  f.traces = std::move(traces);
  f.exact = exact;
  f.error_estimate = error_estimate;
  return f;
}

// -----------------------------------------------------------------------------

BoundaryValue extrapolate_to_zero(std::span<const double> h, std::span<const cplx> v) {
  const std::size_t n = h.size();
  if (n == 0 || v.size() != n) fail(ErrorKind::validation, "extrapolation needs matching samples");
  if (n == 1) return {v[0], kInf};
  // table[j] holds P_{j..i}(0) for the current i.
  std::vector<cplx> table(v.begin(), v.end());
  cplx best_excl_first = v[n - 1];
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t j = 0; j + m < n; ++j) {
      const std::size_t i = j + m;
      table[j] = (h[i] * table[j] - h[j] * table[j + 1]) / (h[i] - h[j]);
    }
    if (m == n - 2) best_excl_first = table[1];
  }
  return {table[0], std::abs(table[0] - best_excl_first)};
}

BoundaryValue boundary_value(const ChainEvaluator& chain, double t, double theta, const BoundarySettings& settings) {
  const std::size_t count = settings.levels + 1;
  std::vector<double> h(count);
  std::vector<cplx> v(count);
  const cplx u = std::polar(1.0, theta);
  for (std::size_t j = 0; j < count; ++j) {
    h[j] = settings.delta * std::ldexp(1.0, -static_cast<int>(j));
    v[j] = chain.eval(t, (1.0 - h[j]) * u);
  }
  return extrapolate_to_zero(h, v);
}

QCExtensionGrid becker_extend(const ChainEvaluator& chain, const PolarGrid& grid, double k,
                              const BoundarySettings& settings) {
  if (chain.settings().mode != ChainMode::radial) fail(ErrorKind::validation, "Becker extension needs a radial chain");
  const auto& radii = grid.radii();
  if (!(radii.front() < 1.0 && radii.back() > 1.0)) {
    fail(ErrorKind::validation, "grid radii must straddle the unit circle",
         {{"rho_min", radii.front()}, {"rho_max", radii.back()}});
  }
  if (!(settings.delta > 0.0 && settings.delta < 1.0) || settings.levels < 1) {
    fail(ErrorKind::validation, "boundary settings out of range");
  }
  const HerglotzSpec& p = chain.trajectory().field().herglotz();
  const ConditionReport cond = check_becker_condition(p, k, Sampling::for_spec(p));
  if (!cond.satisfied) {
    fail(ErrorKind::validation, "Herglotz function violates Becker's condition for the declared k",
         {{"k", k}, {"worst_margin", cond.worst_margin}, {"worst_t", cond.worst_t}});
  }

  QCExtensionGrid out(grid);
  out.k = k;
  const std::size_t n = grid.angular_count();
  parallel_for(grid.size(), [&](std::size_t idx) {
    const std::size_t i = idx / n, j = idx % n;
    const double rho = radii[i];
    if (rho < 1.0) {
      out.values[idx] = chain.eval(0.0, grid.point(i, j));
    } else {
      const BoundaryValue b = boundary_value(chain, std::log(rho), grid.angle(j), settings);
      out.values[idx] = b.value;
      out.residuals[idx] = b.residual;
    }
  });

  for (std::size_t idx = 0; idx < out.residuals.size(); ++idx) {
    if (out.residuals[idx] > out.worst_residual) {
      out.worst_residual = out.residuals[idx];
      out.worst_residual_theta = grid.angle(idx % n);
    }
  }
  if (!(out.worst_residual <= settings.tolerance)) {
    fail(ErrorKind::boundary_resolution, "boundary extrapolation residual above tolerance",
         {{"worst_residual", out.worst_residual}, {"worst_theta", out.worst_residual_theta},
          {"tolerance", settings.tolerance}});
  }

  // Radial continuity: |F_t| <= |p| |F_theta| on the circle and |p| <= (1+k)/(1-k).
  const double dtheta = kTwoPi / static_cast<double>(n);
  const double p_bound = (1.0 + k) / (1.0 - k);
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    if (radii[i] < 1.0) continue;
    double jump = 0.0, slope = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      jump = std::max(jump, std::abs(out.at(i + 1, j) - out.at(i, j)));
      for (std::size_t r : {i, i + 1}) slope = std::max(slope, std::abs(out.at(r, (j + 1) % n) - out.at(r, j)) / dtheta);
    }
    out.max_radial_jump = std::max(out.max_radial_jump, jump);
    out.radial_jump_bound = std::max(out.radial_jump_bound, std::log(radii[i + 1] / radii[i]) * slope * p_bound * 1.1);
  }

  if (settings.seam) {
    SeamTrace seam;
    seam.tolerance = settings.tolerance;
    seam.interior.resize(n);
    seam.exterior.resize(n);
    parallel_for(n, [&](std::size_t j) {
      const double theta = grid.angle(j);
      seam.interior[j] = boundary_value(chain, 0.0, theta, settings).value;
      const std::size_t count = settings.levels + 1;
      std::vector<double> h(count);
      std::vector<cplx> v(count);
      for (std::size_t m = 0; m < count; ++m) {
        h[m] = settings.delta * std::ldexp(1.0, -static_cast<int>(m));
        v[m] = boundary_value(chain, std::log1p(h[m]), theta, settings).value;
      }
      seam.exterior[j] = extrapolate_to_zero(h, v).value;
    });
    for (std::size_t j = 0; j < n; ++j) {
      const double gap = std::abs(seam.interior[j] - seam.exterior[j]);
      if (gap > seam.discrepancy) {
        seam.discrepancy = gap;
        seam.worst_theta = grid.angle(j);
      }
    }
    if (!(seam.discrepancy <= settings.tolerance)) {
      fail(ErrorKind::boundary_resolution, "seam traces disagree beyond tolerance",
           {{"discrepancy", seam.discrepancy}, {"worst_theta", seam.worst_theta}});
    }
    out.seam = std::move(seam);
  }
  return out;
}

// -----------------------------------------------------------------------------

namespace {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<cplx> circle_fourier(std::span<const cplx> trace) {
  const std::size_t n = trace.size();
  if (!is_power_of_two(n)) fail(ErrorKind::validation, "trace length must be a power of two");
  std::vector<cplx> in(trace.begin(), trace.end()), spectrum(n);
  auto* fin = reinterpret_cast<fftw_complex*>(in.data());
  auto* fout = reinterpret_cast<fftw_complex*>(spectrum.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), fin, fout, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<cplx> a(n);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  for (std::ptrdiff_t m = -half; m < half; ++m) {
    const auto src = static_cast<std::size_t>((m + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n));
    a[static_cast<std::size_t>(m + half)] = spectrum[src] / static_cast<double>(n);
  }
  return a;
}

BeckerReport classify_becker(const BeltramiField& field, std::optional<double> tolerance) {
  if (field.angular_count < 64) {
    fail(ErrorKind::validation, "classification needs at least 64 angles per circle",
         {{"n", static_cast<double>(field.angular_count)}});
  }
  BeckerReport report;
  report.tolerance = tolerance.value_or(field.exact ? 1e-9 : std::max(1e-3, field.error_estimate));
  const int half = static_cast<int>(field.angular_count / 2);
  for (std::size_t c = 0; c < field.radii.size(); ++c) {
    const double rho = field.radii[c];
    if (!(rho > 1.0)) continue;
    for (cplx m : field.traces[c]) {
      report.max_abs_mu = std::max(report.max_abs_mu, std::abs(m));
      if (!(std::abs(m) < 1.0)) {
        fail(ErrorKind::not_quasiconformal, "|mu| >= 1 on a trace", {{"rho", rho}, {"abs_mu", std::abs(m)}});
      }
    }
    CircleCoefficients cc{rho, circle_fourier(field.traces[c])};
    for (int n = -half; n <= 1; ++n) {
      const double v = std::abs(cc.coefficient(n));
      if (v > report.worst_abs) {
        report.worst_abs = v;
        report.worst_n = n;
        report.worst_rho = rho;
      }
    }
    report.circles.push_back(std::move(cc));
  }
  if (report.circles.size() < 3) {
    fail(ErrorKind::validation, "classification needs at least three circles with rho > 1",
         {{"circles", static_cast<double>(report.circles.size())}});
  }
  report.is_becker = report.worst_abs <= report.tolerance;
  return report;
}

// -----------------------------------------------------------------------------

namespace {

class RecoveredModel final : public HerglotzModel {
 public:
  RecoveredModel(std::vector<double> times, std::vector<std::vector<cplx>> series)
      : times_(std::move(times)), series_(std::move(series)) {}

  cplx value(cplx z, double t) const override {
    const cplx g = eval_g(z, t, false);
    return (1.0 + g) / (1.0 - g);
  }
  cplx derivative(cplx z, double t) const override {
    const cplx g = eval_g(z, t, false);
    const cplx dg = eval_g(z, t, true);
    return 2.0 * dg / ((1.0 - g) * (1.0 - g));
  }
  std::string kind() const override { return "recovered"; }
  std::string describe() const override {
    return "recovered:" + std::to_string(times_.size()) + " circles";
  }

 private:
  cplx eval_g(cplx z, double t, bool derivative) const {
    std::size_t lo = 0, hi = 0;
    double w = 0.0;
    if (t <= times_.front()) {
      lo = hi = 0;
    } else if (t >= times_.back()) {
      lo = hi = times_.size() - 1;
    } else {
      hi = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
      lo = hi - 1;
      w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    }
    return (1.0 - w) * series_at(lo, z, derivative) + (w == 0.0 ? cplx{} : w * series_at(hi, z, derivative));
  }
  cplx series_at(std::size_t c, cplx z, bool derivative) const {
    // g = sum_m s[m] z^m with s[m] = a_{m+2}.
    const auto& s = series_[c];
    cplx acc{};
    if (!derivative) {
      for (auto it = s.rbegin(); it != s.rend(); ++it) acc = acc * z + *it;
      return acc;
    }
    for (std::size_t m = s.size(); m-- > 1;) acc = acc * z + static_cast<double>(m) * s[m];
    return acc;
  }

  std::vector<double> times_;
  std::vector<std::vector<cplx>> series_;
};

}  // namespace

RecoveredHerglotz recover_herglotz_from_mu(const BeltramiField& field, double tail_tolerance) {
  const BeckerReport report = classify_becker(field);
  if (!report.is_becker) {
    fail(ErrorKind::validation, "field is not a Becker extension; recovery needs one",
         {{"worst_n", report.worst_n}, {"worst_abs", report.worst_abs}});
  }
  const std::size_t n = field.angular_count;
  const int half = static_cast<int>(n / 2);
  RecoveredHerglotz out{HerglotzSpec::constant(1.0), 0.0, {}, {}, 0.0, 0.0};
  out.noise_floor = report.worst_abs;
  for (const auto& cc : report.circles) {
    for (int m = (3 * static_cast<int>(n)) / 8; m < half; ++m) {
      out.tail = std::max(out.tail, std::abs(cc.coefficient(m)));
    }
  }
  if (out.tail > tail_tolerance) {
    fail(ErrorKind::reconstruction_unstable, "Fourier tail of mu does not decay",
         {{"tail", out.tail}, {"tolerance", tail_tolerance}});
  }

  std::vector<std::pair<double, std::vector<cplx>>> rows;
  for (const auto& cc : report.circles) {
    std::vector<cplx> s;
    for (int m = 2; m < half; ++m) {
      const cplx a = cc.coefficient(m);
      s.push_back(std::abs(a) > out.noise_floor ? a : cplx{});
    }
    while (!s.empty() && s.back() == cplx{}) s.pop_back();
    if (s.empty()) s.push_back(0.0);
    rows.emplace_back(std::log(cc.rho), std::move(s));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  // sup |g| on the unit circle, sampled four times finer than the traces.
  const std::size_t fine = 4 * n;
  for (const auto& [t, s] : rows) {
    for (std::size_t j = 0; j < fine; ++j) {
      const cplx z = std::polar(1.0, kTwoPi * static_cast<double>(j) / static_cast<double>(fine));
      cplx acc{};
      for (auto it = s.rbegin(); it != s.rend(); ++it) acc = acc * z + *it;
      out.k_observed = std::max(out.k_observed, std::abs(acc));
    }
    out.times.push_back(t);
    out.series.push_back(s);
  }
  out.spec = HerglotzSpec(std::make_shared<RecoveredModel>(out.times, out.series));
  return out;
}

}  // namespace loewner
