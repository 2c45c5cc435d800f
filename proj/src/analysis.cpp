#include "loewner/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "loewner/parallel.hpp"

namespace loewner {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_k(double k) {
  if (!(k >= 0.0 && k < 1.0)) fail(ErrorKind::validation, "k must lie in [0, 1)", {{"k", k}});
}

cplx unit_of(cplx z) { return z / std::abs(z); }

cplx cayley_h(cplx z) { return (1.0 + z) / (1.0 - z); }
cplx cayley_h_inv(cplx w) { return (w - 1.0) / (w + 1.0); }

}  // namespace

std::string ClosedFormMap::describe() const {
  std::string out = name;
  char sep = ':';
  for (const auto& [key, v] : parameters) {
    out += sep + key + "=" + fmt(v);
    sep = ',';
  }
  return out;
}

ClosedFormMap oracle_f1(double k) {
  check_k(k);
  ClosedFormMap m;
  m.name = "f1";
  m.parameters = {{"k", k}};
  m.interior = [k](cplx z) { return z / ((1.0 - k * z) * (1.0 - k * z)); };
  m.exterior = [k](cplx z) {
    const cplx u = unit_of(z);
    return z / ((1.0 - k * u) * (1.0 - k * u));
  };
  m.mu = [k](cplx z) -> cplx {
    if (std::abs(z) < 1.0) return 0.0;
    const cplx u = unit_of(z);
    return -k * u * u * u;
  };
  m.chain = [k](double t, cplx z) { return std::exp(t) * z / ((1.0 - k * z) * (1.0 - k * z)); };
  m.derivatives = [k](cplx z) -> std::array<cplx, 3> {
    const cplx w = 1.0 - k * z;
    const cplx w2 = w * w;
    return {(1.0 + k * z) / (w2 * w), k * (4.0 + 2.0 * k * z) / (w2 * w2), k * k * (18.0 + 6.0 * k * z) / (w2 * w2 * w)};
  };
  m.herglotz = HerglotzSpec::koebe(k, 1);
  m.dilatation = k;
  return m;
}

ClosedFormMap oracle_fn(double k, int n) {
  check_k(k);
  if (n < 1) fail(ErrorKind::validation, "n must be a positive integer", {{"n", static_cast<double>(n)}});
  if (n == 1) {
    ClosedFormMap m = oracle_f1(k);
    m.name = "fn";
    m.parameters = {{"k", k}, {"n", 1.0}};
    return m;
  }
  const double e = -2.0 / n;
  ClosedFormMap m;
  m.name = n == 2 ? "f2" : "fn";
  m.parameters = n == 2 ? std::map<std::string, double>{{"k", k}} : std::map<std::string, double>{{"k", k}, {"n", double(n)}};
  m.interior = [k, n, e](cplx z) { return z * std::pow(1.0 - k * std::pow(z, n), e); };
  m.exterior = [k, n, e](cplx z) { return z * std::pow(1.0 - k * std::pow(unit_of(z), n), e); };
  m.mu = [k, n](cplx z) -> cplx {
    if (std::abs(z) < 1.0) return 0.0;
    return -k * std::pow(unit_of(z), n + 2);
  };
  m.chain = [k, n, e](double t, cplx z) { return std::exp(t) * z * std::pow(1.0 - k * std::pow(z, n), e); };
  m.herglotz = HerglotzSpec::koebe(k, n);
  m.dilatation = k;
  return m;
}

ClosedFormMap oracle_f2(double k) { return oracle_fn(k, 2); }

ClosedFormMap oracle_fsigma(double sigma) {
  if (!(sigma > 0.0 && sigma < 2.0)) fail(ErrorKind::validation, "sigma must lie in (0, 2)", {{"sigma", sigma}});
  ClosedFormMap m;
  m.name = "fsigma";
  m.parameters = {{"sigma", sigma}};
  m.interior = [sigma](cplx z) { return cayley_h_inv(std::pow(cayley_h(z), sigma)) / sigma; };
  m.exterior = [sigma](cplx z) -> cplx {
    if (z == cplx(1.0, 0.0)) return 1.0 / sigma;
    if (z == cplx(-1.0, 0.0)) return -1.0 / sigma;
    // -H(z) lies in the right half-plane for |z| >= 1; the principal log maps it onto |Im| < pi/2.
    const cplx s = std::log(-cayley_h(z));
    const cplx w = -std::exp(cplx(sigma * s.real(), (2.0 - sigma) * s.imag()));
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return 1.0 / sigma;
    return cayley_h_inv(w) / sigma;
  };
  m.mu = [sigma](cplx z) -> cplx {
    if (std::abs(z) < 1.0) return 0.0;
    const cplx z2 = z * z;
    return (sigma - 1.0) * (z2 - 1.0) / (std::conj(z2) - 1.0);
  };
  m.dilatation = std::abs(sigma - 1.0);
  return m;
}

ClosedFormMap oracle(const std::string& name, const std::map<std::string, double>& parameters) {
  auto get = [&](const char* key) {
    auto it = parameters.find(key);
    if (it == parameters.end()) fail(ErrorKind::validation, "missing parameter '" + std::string(key) + "' for " + name);
    return it->second;
  };
  if (name == "f1") return oracle_f1(get("k"));
  if (name == "f2") return oracle_f2(get("k"));
  if (name == "fn") {
    const double n = get("n");
    if (n != std::floor(n) || n < 1.0 || n > 64.0) fail(ErrorKind::validation, "n must be an integer in [1, 64]", {{"n", n}});
    return oracle_fn(get("k"), static_cast<int>(n));
  }
  if (name == "fsigma") return oracle_fsigma(get("sigma"));
  fail(ErrorKind::validation, "unknown closed-form map '" + name + "' (expected f1, f2, fn, fsigma)");
}

// -----------------------------------------------------------------------------
// Samplers

namespace {

class FunctionImpl final : public PlanarMapSampler::Impl {
 public:
  explicit FunctionImpl(std::function<cplx(cplx)> f) : f_(std::move(f)) {}
  cplx value(cplx z) const override { return f_(z); }

 private:
  std::function<cplx(cplx)> f_;
};

class ChainImpl final : public PlanarMapSampler::Impl {
 public:
  ChainImpl(std::shared_ptr<const ChainEvaluator> chain, BoundarySettings boundary)
      : chain_(std::move(chain)), boundary_(boundary) {}
  cplx value(cplx z) const override {
    const double r = std::abs(z);
    if (r < 1.0) return chain_->eval(0.0, z);
    return boundary_value(*chain_, std::log(r), std::arg(z), boundary_).value;
  }

 private:
  std::shared_ptr<const ChainEvaluator> chain_;
  BoundarySettings boundary_;
};

/// Lagrange weights and first-derivative weights at x.
void lagrange_weights(std::span<const double> nodes, double x, std::vector<double>& w, std::vector<double>& dw) {
  const std::size_t m = nodes.size();
  w.assign(m, 0.0);
  dw.assign(m, 0.0);
  for (std::size_t q = 0; q < m; ++q) {
    double denom = 1.0, prod = 1.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == q) continue;
      denom *= nodes[q] - nodes[r];
      prod *= x - nodes[r];
    }
    w[q] = prod / denom;
    double d = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      if (s == q) continue;
      double p = 1.0;
      for (std::size_t r = 0; r < m; ++r) {
        if (r != q && r != s) p *= x - nodes[r];
      }
      d += p;
    }
    dw[q] = d / denom;
  }
}

class GridImpl final : public PlanarMapSampler::Impl {
 public:
  explicit GridImpl(QCExtensionGrid grid) : grid_(std::move(grid)) {
    const auto& radii = grid_.grid.radii();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!(radii[i] > 0.0)) fail(ErrorKind::validation, "grid radii must be positive");
      if (i > 0 && !(radii[i] > radii[i - 1])) fail(ErrorKind::validation, "grid radii must be increasing");
      log_radii_.push_back(std::log(radii[i]));
    }
  }

  cplx value(cplx z) const override { return jet(z, 4).value; }

  PolarJet jet(cplx z, std::size_t stencil) const {
    const auto& radii = grid_.grid.radii();
    const double r = std::abs(z);
    if (!(r >= radii.front() * (1.0 - 1e-12) && r <= radii.back() * (1.0 + 1e-12))) {
      fail(ErrorKind::domain, "point outside the grid's radial range",
           {{"abs_z", r}, {"rho_min", radii.front()}, {"rho_max", radii.back()}});
    }
    // Rows on the point's side of the unit circle.
    const bool outside = r >= 1.0;
    std::size_t lo = 0, hi = radii.size();
    const auto first_out = static_cast<std::size_t>(std::lower_bound(radii.begin(), radii.end(), 1.0) - radii.begin());
    if (outside) {
      lo = first_out;
    } else {
      hi = first_out;
    }
    if (lo >= hi) fail(ErrorKind::domain, "grid has no rows on this side of the unit circle", {{"abs_z", r}});
    const std::size_t avail = hi - lo;
    const std::size_t mr = std::min(stencil, avail);
    const double t = std::log(r);
    const auto pos = static_cast<std::size_t>(std::lower_bound(log_radii_.begin() + static_cast<std::ptrdiff_t>(lo),
                                                               log_radii_.begin() + static_cast<std::ptrdiff_t>(hi), t) -
                                              log_radii_.begin());
    std::size_t r0 = pos >= lo + mr / 2 ? pos - mr / 2 : lo;
    r0 = std::min(r0, hi - mr);

    const std::size_t n = grid_.grid.angular_count();
    const std::size_t mt = std::min<std::size_t>(stencil, n);
    const double dtheta = kTwoPi / static_cast<double>(n);
    double theta = std::arg(z);
    if (theta < 0.0) theta += kTwoPi;
    const double cell = std::floor(theta / dtheta);
    const auto j0 = static_cast<std::ptrdiff_t>(cell) - static_cast<std::ptrdiff_t>((mt - 1) / 2);

    std::vector<double> tn(mr), an(mt), wt, dwt, wa, dwa;
    for (std::size_t a = 0; a < mr; ++a) tn[a] = log_radii_[r0 + a];
    for (std::size_t b = 0; b < mt; ++b) an[b] = static_cast<double>(j0 + static_cast<std::ptrdiff_t>(b)) * dtheta;
    lagrange_weights(tn, t, wt, dwt);
    lagrange_weights(an, theta, wa, dwa);
    if (mr == 1) dwt[0] = std::nan("");

    PolarJet out{0.0, 0.0, 0.0};
    const auto nn = static_cast<std::ptrdiff_t>(n);
    for (std::size_t a = 0; a < mr; ++a) {
      cplx row_v{}, row_d{};
      for (std::size_t b = 0; b < mt; ++b) {
        const std::ptrdiff_t j = ((j0 + static_cast<std::ptrdiff_t>(b)) % nn + nn) % nn;
        const cplx f = grid_.at(r0 + a, static_cast<std::size_t>(j));
        row_v += wa[b] * f;
        row_d += dwa[b] * f;
      }
      out.value += wt[a] * row_v;
      out.d_t += dwt[a] * row_v;
      out.d_theta += wt[a] * row_d;
    }
    return out;
  }

  /// Leave-one-out angular prediction error over all nodes.
  double leave_one_out() const {
    const std::size_t n = grid_.grid.angular_count();
    if (n < 5) return kInf;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid_.grid.radii().size(); ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto f = [&](std::ptrdiff_t d) {
          const auto nn = static_cast<std::ptrdiff_t>(n);
          return grid_.at(i, static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(j) + d) % nn + nn) % nn));
        };
        const cplx pred = (2.0 / 3.0) * (f(-1) + f(1)) - (1.0 / 6.0) * (f(-2) + f(2));
        worst = std::max(worst, std::abs(pred - grid_.at(i, j)));
      }
    }
    return worst;
  }

 private:
  QCExtensionGrid grid_;
  std::vector<double> log_radii_;
};

}  // namespace

PlanarMapSampler PlanarMapSampler::from_closed_form(ClosedFormMap map) {
  auto name = map.describe();
  auto impl = std::make_shared<FunctionImpl>([m = map](cplx z) { return m(z); });
  PlanarMapSampler s(Kind::closed_form, std::move(name), std::move(impl), true);
  s.closed_form_ = std::move(map);
  return s;
}

PlanarMapSampler PlanarMapSampler::from_chain(std::shared_ptr<const ChainEvaluator> chain, BoundarySettings boundary) {
  if (!chain) fail(ErrorKind::validation, "chain-backed sampler needs a chain");
  std::string name = "chain:" + chain->trajectory().field().describe();
  return PlanarMapSampler(Kind::chain_backed, std::move(name), std::make_shared<ChainImpl>(std::move(chain), boundary),
                          true);
}

PlanarMapSampler PlanarMapSampler::from_grid(QCExtensionGrid grid) {
  auto impl = std::make_shared<GridImpl>(std::move(grid));
  const double loo = impl->leave_one_out();
  PlanarMapSampler s(Kind::grid_backed, "grid", std::move(impl), true);
  s.interpolation_error_ = loo;
  return s;
}

PlanarMapSampler PlanarMapSampler::from_function(std::string name, std::function<cplx(cplx)> f, bool seam) {
  return PlanarMapSampler(Kind::function, std::move(name), std::make_shared<FunctionImpl>(std::move(f)), seam);
}

PolarJet PlanarMapSampler::polar_jet(cplx z, std::size_t stencil) const {
  const auto* g = dynamic_cast<const GridImpl*>(impl_.get());
  if (!g) fail(ErrorKind::validation, "polar jets are only available for grid-backed samplers");
  if (stencil < 2) fail(ErrorKind::validation, "stencil must have at least two points");
  return g->jet(z, stencil);
}

// -----------------------------------------------------------------------------
// Wirtinger derivatives

namespace {

WirtingerPair cartesian(const PlanarMapSampler& f, cplx z, double h) {
  const cplx fx = (f(z + h) - f(z - h)) / (2.0 * h);
  const cplx fy = (f(z + cplx(0.0, h)) - f(z - cplx(0.0, h))) / (2.0 * h);
  const cplx i(0.0, 1.0);
  return {(fx - i * fy) / 2.0, (fx + i * fy) / 2.0};
}

WirtingerPair polar(const PlanarMapSampler& f, cplx z, double h, int order) {
  const double r = std::abs(z);
  const double t = std::log(r), theta = std::arg(z);
  const double side = r >= 1.0 ? 1.0 : -1.0;
  const double ht = h / r, hth = h / r;
  auto at = [&](double dt, double dth) { return f(std::exp(cplx(t + dt, theta + dth))); };
  cplx ft, fth;
  if (order == 2) {
    ft = side * (-3.0 * at(0, 0) + 4.0 * at(side * ht, 0) - at(2 * side * ht, 0)) / (2.0 * ht);
    fth = (at(0, hth) - at(0, -hth)) / (2.0 * hth);
  } else {
    ft = side *
         (-25.0 * at(0, 0) + 48.0 * at(side * ht, 0) - 36.0 * at(2 * side * ht, 0) + 16.0 * at(3 * side * ht, 0) -
          3.0 * at(4 * side * ht, 0)) /
         (12.0 * ht);
    fth = (at(0, -2 * hth) - 8.0 * at(0, -hth) + 8.0 * at(0, hth) - at(0, 2 * hth)) / (12.0 * hth);
  }
  const cplx i(0.0, 1.0);
  return {(ft - i * fth) / (2.0 * z), (ft + i * fth) / (2.0 * std::conj(z))};
}

/// Also returns a lower-order estimate for error monitoring: the finer
/// central difference in Cartesian mode, the order-2 stencil in polar mode.
WirtingerPair wirtinger_pair(const PlanarMapSampler& f, cplx z, const WirtingerSettings& settings,
                             WirtingerPair* lower) {
  const double h = settings.h;
  if (!(h > 0.0)) fail(ErrorKind::validation, "step h must be positive", {{"h", h}});
  if (settings.order != 2 && settings.order != 4) {
    fail(ErrorKind::validation, "order must be 2 or 4", {{"order", static_cast<double>(settings.order)}});
  }
  if (f.seam() && std::abs(std::abs(z) - 1.0) < 2.0 * h) {
    if (!(std::abs(z) > 4.0 * h)) fail(ErrorKind::domain, "point too close to the origin for a polar stencil");
    const WirtingerPair out = polar(f, z, h, settings.order);
    if (lower) *lower = settings.order == 4 ? polar(f, z, h, 2) : out;
    return out;
  }
  if (settings.order == 2) {
    const WirtingerPair out = cartesian(f, z, h);
    if (lower) *lower = out;
    return out;
  }
  const WirtingerPair coarse = cartesian(f, z, h);
  const WirtingerPair fine = cartesian(f, z, h / 2.0);
  if (lower) *lower = fine;
  return {(4.0 * fine.dz - coarse.dz) / 3.0, (4.0 * fine.dzbar - coarse.dzbar) / 3.0};
}

}  // namespace

WirtingerPair wirtinger(const PlanarMapSampler& f, cplx z, const WirtingerSettings& settings) {
  return wirtinger_pair(f, z, settings, nullptr);
}

// -----------------------------------------------------------------------------
// Beltrami fields

namespace {

cplx mu_from_jet(const PolarJet& j, double theta) {
  const cplx i(0.0, 1.0);
  return std::polar(1.0, 2.0 * theta) * (j.d_t + i * j.d_theta) / (j.d_t - i * j.d_theta);
}

[[noreturn]] void degenerate(double rho, double theta) {
  fail(ErrorKind::degenerate_jacobian, "Jacobian is not positive at a sample", {{"rho", rho}, {"theta", theta}});
}

}  // namespace

BeltramiField beltrami_field(const PlanarMapSampler& f, const std::vector<double>& radii, std::size_t n,
                             const BeltramiOptions& options) {
  if (radii.empty()) fail(ErrorKind::validation, "radii list is empty");
  if (!is_power_of_two(n)) fail(ErrorKind::validation, "N must be a power of two", {{"n", static_cast<double>(n)}});
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorKind::validation, "radii must be positive and finite", {{"rho", r}});
  }
  const std::size_t m = radii.size();
  std::vector<std::vector<cplx>> traces(m, std::vector<cplx>(n));
  const PolarGrid grid(radii, n);

  if (options.prefer_exact && f.closed_form() && f.closed_form()->mu) {
    const auto& mu = f.closed_form()->mu;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) traces[i][j] = mu(grid.point(i, j));
    }
    return BeltramiField::from_traces(radii, std::move(traces), true);
  }

  std::vector<double> errors(m * n, 0.0);
  if (f.kind() == PlanarMapSampler::Kind::grid_backed) {
    parallel_for(m * n, [&](std::size_t idx) {
      const std::size_t i = idx / n, j = idx % n;
      const cplx z = grid.point(i, j);
      const PolarJet j4 = f.polar_jet(z, 4);
      const PolarJet j6 = f.polar_jet(z, 6);
      const cplx i_(0.0, 1.0);
      if (!(std::abs(j4.d_t - i_ * j4.d_theta) > std::abs(j4.d_t + i_ * j4.d_theta))) degenerate(radii[i], grid.angle(j));
      traces[i][j] = mu_from_jet(j4, grid.angle(j));
      errors[idx] = std::abs(traces[i][j] - mu_from_jet(j6, grid.angle(j)));
    });
  } else {
    parallel_for(m * n, [&](std::size_t idx) {
      const std::size_t i = idx / n, j = idx % n;
      const cplx z = grid.point(i, j);
      WirtingerPair low;
      const WirtingerPair w = wirtinger_pair(f, z, options.wirtinger, &low);
      if (!(std::abs(w.dz) > std::abs(w.dzbar))) degenerate(radii[i], grid.angle(j));
      traces[i][j] = w.dzbar / w.dz;
      errors[idx] = std::abs(traces[i][j] - low.dzbar / low.dz);
    });
  }
  const double err = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
  return BeltramiField::from_traces(radii, std::move(traces), false, err);
}

// -----------------------------------------------------------------------------
// Schwarzian derivative

std::array<cplx, 3> cauchy_derivatives(const std::function<cplx(cplx)>& f, cplx z, double radius, std::size_t nodes) {
  if (!(radius > 0.0)) fail(ErrorKind::validation, "Cauchy radius must be positive");
  if (nodes < 8) fail(ErrorKind::validation, "Cauchy integral needs at least 8 nodes");
  std::array<cplx, 3> sums{};
  for (std::size_t j = 0; j < nodes; ++j) {
    const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(nodes);
    const cplx fv = f(z + std::polar(radius, phi));
    for (int m = 1; m <= 3; ++m) sums[static_cast<std::size_t>(m - 1)] += fv * std::polar(1.0, -m * phi);
  }
  const double inv = 1.0 / static_cast<double>(nodes);
  return {sums[0] * inv / radius, 2.0 * sums[1] * inv / (radius * radius),
          6.0 * sums[2] * inv / (radius * radius * radius)};
}

cplx schwarzian_from_derivatives(const std::array<cplx, 3>& d) {
  if (!(std::abs(d[0]) >= 1e-12)) fail(ErrorKind::derivative_degenerate, "|f'| below 1e-12", {{"abs_fprime", std::abs(d[0])}});
  const cplx q = d[1] / d[0];
  return d[2] / d[0] - 1.5 * q * q;
}

namespace {

void check_disk(cplx z) {
  if (!(std::abs(z) < 1.0)) fail(ErrorKind::domain, "Schwarzian needs |z| < 1", {{"abs_z", std::abs(z)}});
}

double cauchy_radius(cplx z) { return std::min(0.25, 0.5 * (1.0 - std::abs(z))); }

}  // namespace

cplx schwarzian(const ClosedFormMap& f, cplx z) {
  check_disk(z);
  if (f.derivatives) return schwarzian_from_derivatives(f.derivatives(z));
  return schwarzian_from_derivatives(cauchy_derivatives(f.interior, z, cauchy_radius(z)));
}

cplx schwarzian(const MobiusTransform& m, cplx z) {
  const cplx d = m.derivative(z);
  if (!(std::abs(d) >= 1e-12)) fail(ErrorKind::derivative_degenerate, "|f'| below 1e-12", {{"abs_fprime", std::abs(d)}});
  return 0.0;
}

cplx schwarzian(const std::function<cplx(cplx)>& f, cplx z) {
  check_disk(z);
  return schwarzian_from_derivatives(cauchy_derivatives(f, z, cauchy_radius(z)));
}

SchwarzianReport schwarzian_norm(const std::function<cplx(cplx)>& s_of_z, const PolarGrid& grid, std::optional<double> k) {
  if (k && !(*k >= 0.0 && *k < 1.0)) fail(ErrorKind::validation, "k must lie in [0, 1)", {{"k", *k}});
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t idx) {
    const cplx z = grid.point(idx / grid.angular_count(), idx % grid.angular_count());
    check_disk(z);
    const double w = 1.0 - std::norm(z);
    values[idx] = w * w * std::abs(s_of_z(z));
  });
  SchwarzianReport report;
  report.samples = grid.size();
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    if (values[idx] > report.norm || idx == 0) {
      report.norm = values[idx];
      report.argmax = grid.point(idx / grid.angular_count(), idx % grid.angular_count());
    }
  }
  report.k = k;
  if (k) {
    report.necessary_bound = 6.0 * *k;
    report.within_necessary = report.norm <= report.necessary_bound;
  }
  report.sufficiency_k = report.norm / 2.0;
  report.sufficient = report.sufficiency_k < 1.0;
  return report;
}

SchwarzianReport schwarzian_norm(const ClosedFormMap& f, const PolarGrid& grid, std::optional<double> k) {
  return schwarzian_norm([&f](cplx z) { return schwarzian(f, z); }, grid, k);
}

PolarGrid schwarzian_grid() {
  std::vector<double> radii;
  for (int i = 0; i < 20; ++i) radii.push_back(0.05 * i);
  return PolarGrid(std::move(radii), 64);
}

}  // namespace loewner
