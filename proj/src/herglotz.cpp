#include "loewner/herglotz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

namespace loewner {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(cplx v) {
  if (v.imag() == 0.0) return fmt(v.real());
  return fmt(v.real()) + "," + fmt(v.imag());
}

cplx horner(const std::vector<cplx>& c, cplx z) {
  cplx acc{};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cplx horner_derivative(const std::vector<cplx>& c, cplx z) {
  cplx acc{};
  for (std::size_t i = c.size(); i-- > 1;) acc = acc * z + static_cast<double>(i) * c[i];
  return acc;
}

class ConstantModel final : public HerglotzModel {
 public:
  explicit ConstantModel(cplx c) : c_(c) {}
  cplx value(cplx, double) const override { return c_; }
  cplx derivative(cplx, double) const override { return 0.0; }
  std::string kind() const override { return "constant"; }
  std::string describe() const override { return "const:" + fmt(c_); }

 private:
  cplx c_;
};

class KoebeModel final : public HerglotzModel {
 public:
  KoebeModel(double k, int n) : k_(k), n_(n) {}
  cplx value(cplx z, double) const override {
    const cplx w = k_ * std::pow(z, n_);
    return (1.0 - w) / (1.0 + w);
  }
  cplx derivative(cplx z, double) const override {
    if (n_ == 1) {
      const cplx den = 1.0 + k_ * z;
      return -2.0 * k_ / (den * den);
    }
    const cplx den = 1.0 + k_ * std::pow(z, n_);
    return -2.0 * k_ * static_cast<double>(n_) * std::pow(z, n_ - 1) / (den * den);
  }
  std::string kind() const override { return "catalog"; }
  std::string describe() const override {
    return n_ == 1 ? "koebe:" + fmt(k_) : "koebe:" + fmt(k_) + "," + std::to_string(n_);
  }

 private:
  double k_;
  int n_;
};

class CayleyModel final : public HerglotzModel {
 public:
  cplx value(cplx z, double) const override { return (1.0 + z) / (1.0 - z); }
  cplx derivative(cplx z, double) const override {
    const cplx den = 1.0 - z;
    return 2.0 / (den * den);
  }
  std::string kind() const override { return "catalog"; }
  std::string describe() const override { return "cayley"; }
};

class EssentialModel final : public HerglotzModel {
 public:
  explicit EssentialModel(RhoProfile rho) : rho_(std::move(rho)) {}
  cplx value(cplx, double t) const override {
    const double r = rho_.rho(t);
    const double one_minus = 1.0 - r * r;
    return {1.0, -rho_.drho(t) * (1.0 + r * r) / (one_minus * one_minus)};
  }
  cplx derivative(cplx, double) const override { return 0.0; }
  bool singular_at_zero() const override { return true; }
  std::string kind() const override { return "catalog"; }
  std::string describe() const override { return "essential:" + rho_.name; }

 private:
  RhoProfile rho_;
};

class RationalModel final : public HerglotzModel {
 public:
  RationalModel(std::vector<cplx> num, std::vector<cplx> den) : num_(std::move(num)), den_(std::move(den)) {}
  cplx value(cplx z, double) const override { return horner(num_, z) / horner(den_, z); }
  cplx derivative(cplx z, double) const override {
    const cplx n = horner(num_, z), d = horner(den_, z);
    return (horner_derivative(num_, z) * d - n * horner_derivative(den_, z)) / (d * d);
  }
  std::string kind() const override { return "rational"; }
  std::string describe() const override {
    auto join = [](const std::vector<cplx>& c) {
      std::string s;
      for (std::size_t i = 0; i < c.size(); ++i) s += (i ? ";" : "") + fmt(c[i]);
      return s;
    };
    return "rational:" + join(num_) + "/" + join(den_);
  }

 private:
  std::vector<cplx> num_, den_;
};

class PiecewiseModel final : public HerglotzModel {
 public:
  PiecewiseModel(std::vector<double> starts, std::vector<HerglotzSpec> pieces, double t_max)
      : starts_(std::move(starts)), pieces_(std::move(pieces)), t_max_(t_max) {}

  const HerglotzSpec& piece(double t) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const std::size_t i = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
    return pieces_[i];
  }
  cplx value(cplx z, double t) const override { return piece(t)(z, t); }
  cplx derivative(cplx z, double t) const override { return piece(t).derivative(z, t); }
  double t_max() const override { return t_max_; }
  std::vector<double> breakpoints() const override {
    std::vector<double> bps(starts_.begin() + 1, starts_.end());
    for (const auto& p : pieces_) {
      auto inner = p.breakpoints();
      bps.insert(bps.end(), inner.begin(), inner.end());
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return bps;
  }
  bool singular_at_zero() const override { return pieces_.front().singular_at_zero(); }
  std::string kind() const override { return "piecewise"; }
  std::string describe() const override {
    std::string s = "piecewise:";
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      s += (i ? "|" : "") + fmt(starts_[i]) + "@" + pieces_[i].describe();
    }
    return s;
  }

 private:
  std::vector<double> starts_;
  std::vector<HerglotzSpec> pieces_;
  double t_max_;
};

class CenterConstantModel final : public HerglotzModel {
 public:
  explicit CenterConstantModel(CenterTrajectory a) : a_(std::move(a)) {}
  cplx value(cplx, double t) const override { return a_(t); }
  cplx derivative(cplx, double) const override { return 0.0; }
  std::string kind() const override { return "center-constant"; }
  std::string describe() const override { return "center:" + a_.describe(); }

 private:
  CenterTrajectory a_;
};

class LambdaSliceModel final : public HerglotzModel {
 public:
  LambdaSliceModel(HerglotzSpec base, double k, CenterTrajectory a, cplx lambda)
      : base_(std::move(base)), k_(k), a_(std::move(a)), lambda_(lambda) {}

  cplx value(cplx z, double t) const override {
    const cplx center = a_(t);
    const cplx p = base_(z, t);
    if (!(center.real() > 0.0)) return p;
    const HalfPlaneChart chart(center);
    return chart.forward(lambda_ / k_ * chart.inverse(p));
  }
  cplx derivative(cplx z, double t) const override {
    const cplx center = a_(t);
    const cplx p = base_(z, t);
    const cplx dp = base_.derivative(z, t);
    if (!(center.real() > 0.0)) return dp;
    const HalfPlaneChart chart(center);
    const cplx scale = lambda_ / k_;
    const cplx phi = scale * chart.inverse(p);
    return chart.forward_derivative(phi) * scale * chart.inverse_derivative(p) * dp;
  }
  double t_max() const override { return base_.t_max(); }
  std::vector<double> breakpoints() const override { return base_.breakpoints(); }
  bool singular_at_zero() const override { return base_.singular_at_zero(); }
  std::string kind() const override { return "lambda-slice"; }
  std::string describe() const override {
    return "lambda-slice(" + base_.describe() + ";k=" + fmt(k_) + ";a=" + a_.describe() + ";lambda=" + fmt(lambda_) +
           ")";
  }

 private:
  HerglotzSpec base_;
  double k_;
  CenterTrajectory a_;
  cplx lambda_;
};

// Driving models --------------------------------------------------------------

class ConstantDriving final : public DrivingModel {
 public:
  explicit ConstantDriving(cplx c) : c_(c) {}
  cplx value(double) const override { return c_; }
  bool identically_zero() const override { return c_ == cplx(0.0, 0.0); }
  std::string describe() const override { return fmt(c_); }

 private:
  cplx c_;
};

class RotatingDriving final : public DrivingModel {
 public:
  RotatingDriving(double r, double omega) : r_(r), omega_(omega) {}
  cplx value(double t) const override { return std::polar(r_, omega_ * t); }
  bool identically_zero() const override { return r_ == 0.0; }
  std::string describe() const override { return "rotate:" + fmt(r_) + "," + fmt(omega_); }

 private:
  double r_, omega_;
};

class TableDriving final : public DrivingModel {
 public:
  TableDriving(std::vector<double> starts, std::vector<cplx> values)
      : starts_(std::move(starts)), values_(std::move(values)) {}
  cplx value(double t) const override {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const std::size_t i = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
    return values_[i];
  }
  std::vector<double> breakpoints() const override { return {starts_.begin() + 1, starts_.end()}; }
  bool identically_zero() const override {
    return std::all_of(values_.begin(), values_.end(), [](cplx v) { return v == cplx(0.0, 0.0); });
  }
  std::string describe() const override {
    std::string s = "table:";
    for (std::size_t i = 0; i < starts_.size(); ++i) s += (i ? ";" : "") + fmt(starts_[i]) + "@" + fmt(values_[i]);
    return s;
  }

 private:
  std::vector<double> starts_;
  std::vector<cplx> values_;
};

class EssentialDriving final : public DrivingModel {
 public:
  explicit EssentialDriving(RhoProfile rho) : rho_(rho), theta_(std::make_shared<EssentialAngle>(std::move(rho))) {}
  cplx value(double t) const override {
    const double r = rho_.rho(t);
    const cplx one_minus_ir(1.0, -r);
    return cplx(0.0, 1.0) * std::polar(1.0, (*theta_)(t)) * one_minus_ir * one_minus_ir / (1.0 + r * r);
  }
  bool singular_at_zero() const override { return true; }
  std::string describe() const override { return "essential:" + rho_.name; }

 private:
  RhoProfile rho_;
  std::shared_ptr<EssentialAngle> theta_;
};

class ClosedFormDriving final : public DrivingModel {
 public:
  ClosedFormDriving(std::string name, std::function<cplx(double)> f) : name_(std::move(name)), f_(std::move(f)) {}
  cplx value(double t) const override { return f_(t); }
  std::string describe() const override { return name_; }

 private:
  std::string name_;
  std::function<cplx(double)> f_;
};

}  // namespace

// -----------------------------------------------------------------------------

RhoProfile RhoProfile::tanh_sqrt() {
  return {"tanh-sqrt", [](double t) { return std::tanh(std::sqrt(t)); },
          [](double t) {
            const double u = std::sqrt(t);
            const double sech = 1.0 / std::cosh(u);
            return sech * sech / (2.0 * u);
          }};
}

RhoProfile RhoProfile::sqrt_ratio() {
  return {"sqrt-ratio", [](double t) { return std::sqrt(t) / (1.0 + std::sqrt(t)); },
          [](double t) {
            const double u = std::sqrt(t);
            return 1.0 / (2.0 * u * (1.0 + u) * (1.0 + u));
          }};
}

RhoProfile RhoProfile::by_name(const std::string& name) {
  if (name == "tanh-sqrt") return tanh_sqrt();
  if (name == "sqrt-ratio") return sqrt_ratio();
  fail(ErrorKind::validation, "unknown rho profile '" + name + "' (expected tanh-sqrt or sqrt-ratio)");
}

cplx HerglotzModel::derivative(cplx z, double t) const {
  double h = 1e-3;
  const double room = 1.0 - std::abs(z);
  if (room < 4.0 * h) h = room / 4.0;
  return (-value(z + 2.0 * h, t) + 8.0 * value(z + h, t) - 8.0 * value(z - h, t) + value(z - 2.0 * h, t)) /
         (12.0 * h);
}

HerglotzSpec::HerglotzSpec(std::shared_ptr<const HerglotzModel> model) : model_(std::move(model)) {
  if (!model_) fail(ErrorKind::validation, "null Herglotz model");
}

HerglotzSpec HerglotzSpec::constant(cplx c) {
  if (!(c.real() >= -kHerglotzSlack)) {
    fail(ErrorKind::not_herglotz, "constant Herglotz function needs Re c >= 0", {{"re_c", c.real()}});
  }
  return HerglotzSpec(std::make_shared<ConstantModel>(c));
}

HerglotzSpec HerglotzSpec::koebe(double k, int n) {
  if (!(k >= 0.0 && k <= 1.0)) fail(ErrorKind::validation, "koebe catalog needs k in [0, 1]", {{"k", k}});
  if (n < 1) fail(ErrorKind::validation, "koebe catalog needs n >= 1", {{"n", static_cast<double>(n)}});
  return HerglotzSpec(std::make_shared<KoebeModel>(k, n));
}

HerglotzSpec HerglotzSpec::cayley() { return HerglotzSpec(std::make_shared<CayleyModel>()); }

HerglotzSpec HerglotzSpec::essential_example(RhoProfile rho) {
  return HerglotzSpec(std::make_shared<EssentialModel>(std::move(rho)));
}

HerglotzSpec HerglotzSpec::rational(std::vector<cplx> numerator, std::vector<cplx> denominator) {
  if (numerator.empty() || denominator.empty()) fail(ErrorKind::validation, "rational spec needs coefficients");
  if (denominator.front() == cplx(0.0, 0.0)) fail(ErrorKind::validation, "rational spec has a pole at z = 0");
  return HerglotzSpec(std::make_shared<RationalModel>(std::move(numerator), std::move(denominator)));
}

HerglotzSpec HerglotzSpec::piecewise(std::vector<double> starts, std::vector<HerglotzSpec> pieces, double t_max) {
  if (starts.empty() || starts.size() != pieces.size()) {
    fail(ErrorKind::validation, "piecewise spec needs one start time per piece");
  }
  if (starts.front() != 0.0) fail(ErrorKind::validation, "piecewise spec must start at t = 0");
  for (std::size_t i = 1; i < starts.size(); ++i) {
    if (!(starts[i] > starts[i - 1])) fail(ErrorKind::validation, "piecewise start times must increase");
  }
  if (!(t_max > starts.back())) fail(ErrorKind::validation, "piecewise t_max must exceed the last start");
  return HerglotzSpec(std::make_shared<PiecewiseModel>(std::move(starts), std::move(pieces), t_max));
}

cplx eval_herglotz(const HerglotzSpec& p, cplx z, double t) {
  if (!(std::abs(z) < 1.0)) fail(ErrorKind::domain, "Herglotz evaluation needs |z| < 1", {{"abs_z", std::abs(z)}});
  if (!(t >= 0.0)) fail(ErrorKind::domain, "Herglotz evaluation needs t >= 0", {{"t", t}});
  if (t > p.t_max()) fail(ErrorKind::extrapolation, "time outside the spec's table range", {{"t", t}, {"t_max", p.t_max()}});
  return p(z, t);
}

// -----------------------------------------------------------------------------

DrivingSpec::DrivingSpec(std::shared_ptr<const DrivingModel> model) : model_(std::move(model)) {
  if (!model_) fail(ErrorKind::validation, "null driving model");
}

DrivingSpec DrivingSpec::constant(cplx c) {
  if (std::abs(c) > 1.0 + Tolerance::algebraic) {
    fail(ErrorKind::validation, "driving point must lie in the closed unit disk", {{"abs_tau", std::abs(c)}});
  }
  return DrivingSpec(std::make_shared<ConstantDriving>(c));
}

DrivingSpec DrivingSpec::rotating(double r, double omega) {
  if (!(r >= 0.0 && r <= 1.0)) fail(ErrorKind::validation, "rotating driving needs r in [0, 1]", {{"r", r}});
  return DrivingSpec(std::make_shared<RotatingDriving>(r, omega));
}

DrivingSpec DrivingSpec::table(std::vector<double> starts, std::vector<cplx> values) {
  if (starts.empty() || starts.size() != values.size()) {
    fail(ErrorKind::validation, "driving table needs one value per start time");
  }
  if (starts.front() != 0.0) fail(ErrorKind::validation, "driving table must start at t = 0");
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (i > 0 && !(starts[i] > starts[i - 1])) fail(ErrorKind::validation, "driving table times must increase");
    if (std::abs(values[i]) > 1.0 + Tolerance::algebraic) {
      fail(ErrorKind::validation, "driving point must lie in the closed unit disk", {{"abs_tau", std::abs(values[i])}});
    }
  }
  return DrivingSpec(std::make_shared<TableDriving>(std::move(starts), std::move(values)));
}

DrivingSpec DrivingSpec::essential_example(RhoProfile rho) {
  return DrivingSpec(std::make_shared<EssentialDriving>(std::move(rho)));
}

DrivingSpec DrivingSpec::closed_form(std::string name, std::function<cplx(double)> tau) {
  return DrivingSpec(std::make_shared<ClosedFormDriving>(std::move(name), std::move(tau)));
}

void DrivingSpec::validate(std::span<const double> times, double tol) const {
  for (double t : times) {
    const double m = std::abs((*this)(t));
    if (!(m <= 1.0 + tol)) fail(ErrorKind::validation, "|tau(t)| exceeds 1", {{"t", t}, {"abs_tau", m}});
  }
}

EssentialAngle::EssentialAngle(RhoProfile rho) : rho_(std::move(rho)) {}

double EssentialAngle::integrand(double u) const {
  const double r = rho_.rho(u * u);
  const double one_minus = 1.0 - r * r;
  return one_minus * one_minus / (1.0 + r * r) * 2.0 * u / r;
}

double EssentialAngle::panel(double u0, double u1, bool first) const {
  if (u1 <= u0) return 0.0;
  auto f = [this](double u) { return integrand(u); };
  // Gauss nodes never touch u = 0, where the integrand is 0/0.
  if (first) return boost::math::quadrature::gauss<double, 30>::integrate(f, u0, u1);
  return boost::math::quadrature::gauss<double, 15>::integrate(f, u0, u1);
}

double EssentialAngle::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  const double u = std::sqrt(t);
  const auto idx = static_cast<std::size_t>(u / kPanel);
  double base;
  {
    std::lock_guard lock(mutex_);
    while (cumulative_.size() <= idx) {
      const std::size_t i = cumulative_.size() - 1;
      cumulative_.push_back(cumulative_.back() + panel(kPanel * i, kPanel * (i + 1), i == 0));
    }
    base = cumulative_[idx];
  }
  return base + panel(kPanel * idx, u, idx == 0);
}

CenterTrajectory CenterTrajectory::constant(cplx a) {
  if (!(a.real() >= 0.0)) fail(ErrorKind::validation, "centre must satisfy Re a >= 0", {{"re_a", a.real()}});
  return CenterTrajectory(fmt(a), [a](double) { return a; });
}

CenterTrajectory CenterTrajectory::closed_form(std::string name, std::function<cplx(double)> a) {
  return CenterTrajectory(std::move(name), std::move(a));
}

cplx CenterTrajectory::operator()(double t) const {
  const cplx a = a_(t);
  if (!(a.real() >= 0.0)) fail(ErrorKind::validation, "centre left the closed right half-plane", {{"t", t}});
  return a;
}

// -----------------------------------------------------------------------------

Sampling Sampling::standard(double t_hi, std::size_t time_count) {
  Sampling s;
  s.times.reserve(time_count);
  for (std::size_t j = 0; j < time_count; ++j) {
    s.times.push_back(t_hi * (static_cast<double>(j) + 0.5) / static_cast<double>(time_count));
  }
  return s;
}

Sampling Sampling::for_spec(const HerglotzSpec& p) { return standard(std::min(4.0, p.t_max())); }

bool Sampling::excluded(double t) const {
  return std::find(exceptions.begin(), exceptions.end(), t) != exceptions.end();
}

namespace {

template <typename MarginFn>
ConditionReport scan(const Sampling& sampling, double tolerance, MarginFn&& margin_at) {
  ConditionReport report;
  report.tolerance = tolerance;
  for (double t : sampling.times) {
    if (sampling.excluded(t)) continue;
    for (double r : sampling.radii) {
      for (std::size_t j = 0; j < sampling.angles; ++j) {
        const cplx z = std::polar(r, kTwoPi * static_cast<double>(j) / static_cast<double>(sampling.angles));
        const double m = margin_at(z, t);
        ++report.samples;
        if (m > report.worst_margin || std::isnan(m)) {
          report.worst_margin = std::isnan(m) ? kInf : m;
          report.worst_z = z;
          report.worst_t = t;
        }
      }
    }
  }
  report.satisfied = report.worst_margin <= tolerance;
  return report;
}

void check_k(double k) {
  if (!(k >= 0.0 && k < 1.0)) fail(ErrorKind::validation, "k must lie in [0, 1)", {{"k", k}});
}

}  // namespace

ConditionReport check_becker_condition(const HerglotzSpec& p, double k, const Sampling& sampling, double tolerance) {
  check_k(k);
  return scan(sampling, tolerance, [&](cplx z, double t) {
    const cplx v = eval_herglotz(p, z, t);
    const double den = std::abs(v + 1.0);
    if (den == 0.0) fail(ErrorKind::singular_value, "p(z, t) = -1", {{"re_z", z.real()}, {"im_z", z.imag()}, {"t", t}});
    return std::abs(v - 1.0) / den - k;
  });
}

ConditionReport check_weaker_condition(const HerglotzSpec& p, double k, const CenterTrajectory& a,
                                       const Sampling& sampling, double tolerance) {
  check_k(k);
  const double radius = CenterTrajectory::radius(k);
  return scan(sampling, tolerance, [&](cplx z, double t) {
    const cplx v = eval_herglotz(p, z, t);
    if (v.real() < -kHerglotzSlack) {
      fail(ErrorKind::not_herglotz, "Re p < 0 at a sample", {{"re_p", v.real()}, {"t", t}});
    }
    const cplx center = a(t);
    if (!(center.real() > 0.0)) return std::abs(v - center);
    if (!(v.real() > 0.0)) return kInf;
    return hyperbolic_distance_halfplane(v, center) - radius;
  });
}

double circle_mean_defect(const std::function<cplx(cplx)>& f, cplx center, double radius, std::size_t count) {
  cplx sum{};
  for (std::size_t j = 0; j < count; ++j) {
    sum += f(center + std::polar(radius, kTwoPi * static_cast<double>(j) / static_cast<double>(count)));
  }
  return std::abs(sum / static_cast<double>(count) - f(center));
}

ConditionReport validate_herglotz(const HerglotzSpec& p, const Sampling& sampling, double holo_tol) {
  constexpr double probe_radius = 0.01;
  return scan(sampling, 0.0, [&](cplx z, double t) {
    const cplx v = eval_herglotz(p, z, t);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return kInf;
    double m = -v.real() - kHerglotzSlack;
    // Keep the probe circle eight radii from the boundary; the 16-point mean
    // aliases singularities sitting on |z| = 1 at that distance below 1e-14.
    const double r = std::abs(z);
    const double inner = 1.0 - 8.0 * probe_radius;
    const cplx center = r > inner ? z * (inner / r) : z;
    const double defect = circle_mean_defect([&](cplx w) { return p(w, t); }, center, probe_radius);
    m = std::max(m, defect - holo_tol);
    return m;
  });
}

HerglotzSpec lambda_slice(const HerglotzSpec& p, double k, const CenterTrajectory& a, cplx lambda,
                          LambdaSliceOptions* flags) {
  check_k(k);
  if (std::abs(lambda) > 1.0) fail(ErrorKind::validation, "lambda must lie in the closed unit disk");
  if (flags) flags->beyond_guarantee = std::abs(lambda) > k;
  if (k == 0.0) return HerglotzSpec(std::make_shared<CenterConstantModel>(a));
  return HerglotzSpec(std::make_shared<LambdaSliceModel>(p, k, a, lambda));
}

double schwarz_pick_residual(const HerglotzSpec& p, std::span<const PointSample> samples) {
  double worst = -kInf;
  for (const auto& s : samples) {
    const double r2 = std::norm(s.z);
    worst = std::max(worst, (1.0 - r2) * std::abs(p.derivative(s.z, s.t)) - 2.0 * p(s.z, s.t).real());
  }
  return worst;
}

std::vector<PointSample> disk_samples(std::span<const double> radii, std::size_t angles, std::span<const double> times) {
  std::vector<PointSample> out;
  out.reserve(radii.size() * angles * times.size());
  for (double t : times) {
    for (double r : radii) {
      for (std::size_t j = 0; j < angles; ++j) {
        out.push_back({std::polar(r, kTwoPi * static_cast<double>(j) / static_cast<double>(angles)), t});
      }
    }
  }
  return out;
}

}  // namespace loewner
