#include "loewner/core.hpp"

#include <algorithm>
#include <cmath>

namespace loewner {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::io: return "io";
    case ErrorKind::integration: return "integration-failure";
    case ErrorKind::barrier: return "barrier-violation";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::extrapolation: return "extrapolation";
    case ErrorKind::boundary_resolution: return "boundary-resolution";
    case ErrorKind::singular_value: return "singular-value";
    case ErrorKind::not_herglotz: return "not-herglotz";
    case ErrorKind::not_quasiconformal: return "not-quasiconformal";
    case ErrorKind::degenerate_jacobian: return "degenerate-jacobian";
    case ErrorKind::derivative_degenerate: return "derivative-degenerate";
    case ErrorKind::reconstruction_unstable: return "reconstruction-unstable";
    case ErrorKind::cannot_invert: return "cannot-invert";
  }
  return "unknown";
}

bool is_validation_kind(ErrorKind kind) noexcept {
  return kind == ErrorKind::validation || kind == ErrorKind::domain ||
         kind == ErrorKind::degenerate || kind == ErrorKind::io;
}

cplx ExtendedPoint::value() const {
  if (infinite_) fail(ErrorKind::domain, "point at infinity has no finite value");
  return value_;
}

MobiusTransform::MobiusTransform(cplx a, cplx b, cplx c, cplx d) : a_(a), b_(b), c_(c), d_(d) {
  const double det = std::abs(a * d - b * c);
  const double scale = std::abs(a * d) + std::abs(b * c);
  if (!(det > 0.0) || !(det > 1e-15 * scale)) {
    fail(ErrorKind::degenerate, "Moebius coefficients satisfy ad = bc");
  }
}

MobiusTransform MobiusTransform::disk_automorphism(cplx a) {
  if (!(std::abs(a) < 1.0)) fail(ErrorKind::domain, "disk automorphism centre must lie in the unit disk");
  return {1.0, -a, -std::conj(a), 1.0};
}

MobiusTransform MobiusTransform::cayley() { return {1.0, 1.0, -1.0, 1.0}; }

MobiusTransform MobiusTransform::from_three_points(std::span<const cplx, 3> z, std::span<const cplx, 3> w) {
  // S_z sends (z1, z2, z3) to (0, inf, 1); the answer is S_w^{-1} o S_z.
  auto normalizing = [](std::span<const cplx, 3> p) {
    const cplx a = p[2] - p[1];
    const cplx b = -p[0] * (p[2] - p[1]);
    const cplx c = p[2] - p[0];
    const cplx d = -p[1] * (p[2] - p[0]);
    return MobiusTransform(a, b, c, d);
  };
  return normalizing(w).inverse() * normalizing(z);
}

ExtendedPoint MobiusTransform::operator()(const ExtendedPoint& z) const {
  if (z.is_infinite()) {
    if (std::abs(c_) < kPoleThreshold) return ExtendedPoint::infinity();
    return a_ / c_;
  }
  const cplx w = z.value();
  const cplx den = c_ * w + d_;
  if (std::abs(den) < kPoleThreshold) return ExtendedPoint::infinity();
  return (a_ * w + b_) / den;
}

cplx MobiusTransform::eval(cplx z) const { return (*this)(ExtendedPoint(z)).value(); }

cplx MobiusTransform::derivative(cplx z) const {
  const cplx den = c_ * z + d_;
  if (std::abs(den) < kPoleThreshold) fail(ErrorKind::domain, "derivative requested at a pole");
  return determinant() / (den * den);
}

MobiusTransform MobiusTransform::compose(const MobiusTransform& g) const {
  return {a_ * g.a_ + b_ * g.c_, a_ * g.b_ + b_ * g.d_, c_ * g.a_ + d_ * g.c_, c_ * g.b_ + d_ * g.d_};
}

bool MobiusTransform::projectively_equal(const MobiusTransform& other, double tol) const {
  // Normalise both so the largest coefficient of *this is 1, then match the
  // scale on that coefficient.
  const cplx mine[4] = {a_, b_, c_, d_};
  const cplx theirs[4] = {other.a_, other.b_, other.c_, other.d_};
  std::size_t pivot = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (std::abs(mine[i]) > std::abs(mine[pivot])) pivot = i;
  }
  if (std::abs(theirs[pivot]) == 0.0) return false;
  const cplx scale = mine[pivot] / theirs[pivot];
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    worst = std::max(worst, std::abs(mine[i] - scale * theirs[i]) / std::abs(mine[pivot]));
  }
  return worst <= tol;
}

cplx cross_ratio(cplx z1, cplx z2, cplx z3, cplx z4) {
  return (z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3));
}

HalfPlaneChart::HalfPlaneChart(cplx center) : center_(center) {
  if (!(center.real() > 0.0)) {
    fail(ErrorKind::degenerate, "half-plane chart needs Re a > 0", {{"re_a", center.real()}});
  }
}

cplx HalfPlaneChart::forward(cplx z) const {
  return (1.0 + z) / (1.0 - z) * center_.real() + cplx(0.0, center_.imag());
}

cplx HalfPlaneChart::inverse(cplx w) const {
  const cplx shifted = w - cplx(0.0, center_.imag());
  return (shifted - center_.real()) / (shifted + center_.real());
}

cplx HalfPlaneChart::forward_derivative(cplx z) const {
  const cplx den = 1.0 - z;
  return 2.0 * center_.real() / (den * den);
}

cplx HalfPlaneChart::inverse_derivative(cplx w) const {
  const cplx den = w - cplx(0.0, center_.imag()) + center_.real();
  return 2.0 * center_.real() / (den * den);
}

BeckerDisk::BeckerDisk(double k) : k_(k) {
  if (!(k >= 0.0 && k < 1.0)) fail(ErrorKind::validation, "Becker disk needs k in [0, 1)", {{"k", k}});
}

double BeckerDisk::hyperbolic_radius() const { return loewner::hyperbolic_radius(k_); }

double hyperbolic_radius(double r) { return std::atanh(r); }

double hyperbolic_distance_halfplane(cplx w1, cplx w2) {
  if (!(w1.real() > 0.0) || !(w2.real() > 0.0)) {
    fail(ErrorKind::domain, "hyperbolic distance needs points with positive real part");
  }
  const double ratio = std::abs(w1 - w2) / std::abs(w1 + std::conj(w2));
  return std::atanh(std::min(ratio, 1.0));
}

double hyperbolic_distance_disk(cplx z1, cplx z2) {
  if (!(std::abs(z1) < 1.0) || !(std::abs(z2) < 1.0)) {
    fail(ErrorKind::domain, "hyperbolic distance needs points inside the unit disk");
  }
  const double ratio = std::abs(z1 - z2) / std::abs(1.0 - std::conj(z1) * z2);
  return std::atanh(std::min(ratio, 1.0));
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

PolarGrid::PolarGrid(std::vector<double> radii, std::size_t angular_count)
    : radii_(std::move(radii)), n_(angular_count) {
  if (radii_.empty()) fail(ErrorKind::validation, "polar grid needs at least one radius");
  if (!is_power_of_two(n_)) {
    fail(ErrorKind::validation, "angular count must be a power of two", {{"n", static_cast<double>(n_)}});
  }
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] >= 0.0) || !std::isfinite(radii_[i])) {
      fail(ErrorKind::validation, "grid radii must be finite and non-negative");
    }
    if (i > 0 && !(radii_[i] > radii_[i - 1])) {
      fail(ErrorKind::validation, "grid radii must be strictly increasing");
    }
  }
}

}  // namespace loewner
