#pragma once

// Planar-map samplers, numerical Wirtinger derivatives and Beltrami fields,
// the closed-form map catalog, and Schwarzian-derivative bounds.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "loewner/becker.hpp"

namespace loewner {

// ---------------------------------------------------------------------------
// Closed-form catalog

struct ClosedFormMap {
  std::string name;
  std::map<std::string, double> parameters;
  /// f on |z| < 1.
  std::function<cplx(cplx)> interior;
  /// The quasiconformal extension on |z| >= 1.
  std::function<cplx(cplx)> exterior;
  /// mu on |z| > 1, when known in closed form.
  std::function<cplx(cplx)> mu;
  /// f_t(z) of the associated chain, when known.
  std::function<cplx(double, cplx)> chain;
  /// (f', f'', f''') on |z| < 1, when known in closed form.
  std::function<std::array<cplx, 3>(cplx)> derivatives;
  /// Herglotz function of the chain, when known.
  std::optional<HerglotzSpec> herglotz;
  /// Bound on |mu|.
  double dilatation = 0.0;

  cplx operator()(cplx z) const { return std::abs(z) < 1.0 ? interior(z) : exterior(z); }
  std::string describe() const;
};

/// f1: z/(1 - kz)^2, extension z/(1 - k u)^2 with u = z/|z|, mu = -k u^3.
ClosedFormMap oracle_f1(double k);
/// f2 = fn with n = 2: z/(1 - kz^2).
ClosedFormMap oracle_f2(double k);
/// fn: z/(1 - kz^n)^{2/n} (principal root), extension z (1 - k u^n)^{-2/n}, mu = -k u^{n+2}.
ClosedFormMap oracle_fn(double k, int n);
/// f_sigma = sigma^{-1} H^{-1}(H(z)^sigma), H(z) = (1+z)/(1-z); exterior
/// sigma^{-1} H^{-1}(-exp(sigma x + i(2 - sigma) y)) with x + iy = log(-H(z)).
ClosedFormMap oracle_fsigma(double sigma);
/// Dispatch on "f1", "f2", "fn", "fsigma" with parameters k, n, sigma.
ClosedFormMap oracle(const std::string& name, const std::map<std::string, double>& parameters);

// ---------------------------------------------------------------------------
// Samplers

struct PolarJet {
  cplx value;
  cplx d_t;      // dF/dt with z = e^{t + i theta}
  cplx d_theta;  // dF/dtheta
};

class PlanarMapSampler {
 public:
  enum class Kind { closed_form, chain_backed, grid_backed, function };

  class Impl {
   public:
    virtual ~Impl() = default;
    virtual cplx value(cplx z) const = 0;
  };

  static PlanarMapSampler from_closed_form(ClosedFormMap map);
  /// F = f_0 inside, f_{log|z|}(z/|z|) outside (boundary extrapolation).
  static PlanarMapSampler from_chain(std::shared_ptr<const ChainEvaluator> chain, BoundarySettings boundary = {});
  /// Lagrange bicubic interpolation in (log rho, theta), never mixing the two
  /// sides of the unit circle.
  static PlanarMapSampler from_grid(QCExtensionGrid grid);
  static PlanarMapSampler from_function(std::string name, std::function<cplx(cplx)> f, bool seam = false);

  cplx operator()(cplx z) const { return impl_->value(z); }
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// True when derivatives may jump across |z| = 1.
  bool seam() const { return seam_; }
  /// Leave-one-out interpolation error estimate (grid-backed only).
  std::optional<double> interpolation_error() const { return interpolation_error_; }
  /// Grid-backed only: value and polar derivatives from a stencil x stencil
  /// Lagrange patch (stencil 4 is bicubic).
  PolarJet polar_jet(cplx z, std::size_t stencil = 4) const;

  const ClosedFormMap* closed_form() const { return closed_form_ ? &*closed_form_ : nullptr; }

 private:
  PlanarMapSampler(Kind kind, std::string name, std::shared_ptr<const Impl> impl, bool seam)
      : kind_(kind), name_(std::move(name)), impl_(std::move(impl)), seam_(seam) {}

  Kind kind_;
  std::string name_;
  std::shared_ptr<const Impl> impl_;
  bool seam_;
  std::optional<double> interpolation_error_;
  std::optional<ClosedFormMap> closed_form_;
};

// ---------------------------------------------------------------------------
// Wirtinger calculus

struct WirtingerSettings {
  double h = 1e-5;
  /// 2: central differences; 4: Richardson pair (h, h/2).
  int order = 4;
};

struct WirtingerPair {
  cplx dz;
  cplx dzbar;
};

/// d = (d/dx - i d/dy)/2 and dbar = (d/dx + i d/dy)/2 by finite differences.
/// Within h of the seam the stencil switches to polar form, one-sided in the
/// radial direction on the point's own side.
WirtingerPair wirtinger(const PlanarMapSampler& f, cplx z, const WirtingerSettings& settings = {});

struct BeltramiOptions {
  WirtingerSettings wirtinger{};
  /// Use closed-form mu when the sampler carries it.
  bool prefer_exact = false;
};

/// mu on circles |z| = rho at N node-centred angles. Throws
/// degenerate-jacobian where |dF| <= |dbar F|.
BeltramiField beltrami_field(const PlanarMapSampler& f, const std::vector<double>& radii, std::size_t n,
                             const BeltramiOptions& options = {});

// ---------------------------------------------------------------------------
// Schwarzian derivative

/// f', f'', f''' by the Cauchy integral on |w - z| = radius (64 nodes).
std::array<cplx, 3> cauchy_derivatives(const std::function<cplx(cplx)>& f, cplx z, double radius, std::size_t nodes = 64);

/// S = f'''/f' - 3/2 (f''/f')^2 from derivatives; throws derivative-degenerate if |f'| < 1e-12.
cplx schwarzian_from_derivatives(const std::array<cplx, 3>& d);

/// Closed-form derivatives when the catalog has them, Cauchy integrals otherwise.
cplx schwarzian(const ClosedFormMap& f, cplx z);
/// Identically zero; checks local univalence at z.
cplx schwarzian(const MobiusTransform& m, cplx z);
/// For a holomorphic function on the unit disk.
cplx schwarzian(const std::function<cplx(cplx)>& f, cplx z);

struct SchwarzianReport {
  double norm = 0.0;  // sup (1 - |z|^2)^2 |S_f|
  cplx argmax{};
  std::size_t samples = 0;
  /// Declared k: necessary bound 6k for k-q.c. extendibility.
  std::optional<double> k;
  double necessary_bound = 0.0;
  bool within_necessary = false;
  /// k' = norm / 2: the norm bound 2k' is sufficient for k'-q.c. extendibility when k' < 1.
  double sufficiency_k = 0.0;
  bool sufficient = false;
};

SchwarzianReport schwarzian_norm(const std::function<cplx(cplx)>& s_of_z, const PolarGrid& grid,
                                 std::optional<double> k = std::nullopt);
SchwarzianReport schwarzian_norm(const ClosedFormMap& f, const PolarGrid& grid, std::optional<double> k = std::nullopt);

/// Default disk grid for Schwarzian norms: radii 0, 0.05, ..., 0.95 x 64 angles.
PolarGrid schwarzian_grid();

}  // namespace loewner
