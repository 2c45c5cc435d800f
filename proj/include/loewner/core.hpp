#pragma once

// Complex-plane and disk geometry: Moebius maps, the half-plane chart used
// by the lambda construction, Becker disks and polar sampling grids.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "loewner/errors.hpp"

namespace loewner {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Default tolerances. Everything that compares floating point values takes
/// an explicit tolerance argument defaulting to one of these.
struct Tolerance {
  static constexpr double algebraic = 1e-12;
  static constexpr double geometric = 1e-9;
};

/// A point of the Riemann sphere: a finite complex number or infinity.
class ExtendedPoint {
 public:
  constexpr ExtendedPoint() = default;
  constexpr ExtendedPoint(cplx z) : value_(z) {}  // NOLINT(implicit)

  static constexpr ExtendedPoint infinity() {
    ExtendedPoint p;
    p.infinite_ = true;
    return p;
  }

  constexpr bool is_infinite() const { return infinite_; }
  /// Finite value; throws a domain error at infinity.
  cplx value() const;

  friend bool operator==(const ExtendedPoint& a, const ExtendedPoint& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

 private:
  cplx value_{};
  bool infinite_ = false;
};

/// w -> (a w + b) / (c w + d) with ad - bc != 0.
class MobiusTransform {
 public:
  /// Poles are detected when |c w + d| falls below this.
  static constexpr double kPoleThreshold = 1e-300;

  MobiusTransform(cplx a, cplx b, cplx c, cplx d);

  static MobiusTransform identity() { return {1.0, 0.0, 0.0, 1.0}; }
  /// Disk automorphism w -> (w - a) / (1 - conj(a) w), |a| < 1.
  static MobiusTransform disk_automorphism(cplx a);
  /// w -> (1 + w) / (1 - w), the disk onto the right half-plane.
  static MobiusTransform cayley();
  /// The unique map sending z[i] to w[i] for three distinct points each.
  static MobiusTransform from_three_points(std::span<const cplx, 3> z, std::span<const cplx, 3> w);

  cplx a() const { return a_; }
  cplx b() const { return b_; }
  cplx c() const { return c_; }
  cplx d() const { return d_; }
  cplx determinant() const { return a_ * d_ - b_ * c_; }

  ExtendedPoint operator()(const ExtendedPoint& z) const;
  /// Finite evaluation; throws a domain error if z is a pole.
  cplx eval(cplx z) const;
  /// Derivative (ad - bc) / (cz + d)^2.
  cplx derivative(cplx z) const;

  MobiusTransform inverse() const { return {d_, -b_, -c_, a_}; }
  /// (*this) o other
  MobiusTransform compose(const MobiusTransform& other) const;
  friend MobiusTransform operator*(const MobiusTransform& f, const MobiusTransform& g) {
    return f.compose(g);
  }

  /// Coefficient-wise comparison modulo scaling.
  bool projectively_equal(const MobiusTransform& other, double tol = Tolerance::algebraic) const;

 private:
  cplx a_, b_, c_, d_;
};

/// Cross-ratio (z1, z2; z3, z4) = (z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3)).
cplx cross_ratio(cplx z1, cplx z2, cplx z3, cplx z4);

/// Chart H(z) = ((1 + z)/(1 - z)) Re a + i Im a of the disk onto the right
/// half-plane centred at a (H(0) = a). Isometric from the disk metric
/// |dz|/(1-|z|^2) to the half-plane metric |dw|/(2 Re w).
class HalfPlaneChart {
 public:
  explicit HalfPlaneChart(cplx center);

  cplx center() const { return center_; }
  cplx forward(cplx z) const;
  cplx inverse(cplx w) const;
  cplx forward_derivative(cplx z) const;
  cplx inverse_derivative(cplx w) const;

 private:
  cplx center_;
};

/// Closed disk U(k) = { w : |w - 1| <= k |w + 1| }.
class BeckerDisk {
 public:
  explicit BeckerDisk(double k);

  double k() const { return k_; }
  bool contains(cplx w) const { return std::abs(w - 1.0) <= k_ * std::abs(w + 1.0); }
  /// Hyperbolic radius artanh(k) = 1/2 log((1 + k)/(1 - k)).
  double hyperbolic_radius() const;

 private:
  double k_;
};

/// Poincare distance in the right half-plane (metric |dw| / (2 Re w)):
/// artanh(|w1 - w2| / |w1 + conj(w2)|).
double hyperbolic_distance_halfplane(cplx w1, cplx w2);

/// Poincare distance in the unit disk (metric |dz| / (1 - |z|^2)).
double hyperbolic_distance_disk(cplx z1, cplx z2);

/// 1/2 log((1 + r)/(1 - r)).
double hyperbolic_radius(double r);

/// Radii x N node-centred angles theta_j = 2 pi j / N.
class PolarGrid {
 public:
  PolarGrid(std::vector<double> radii, std::size_t angular_count);

  const std::vector<double>& radii() const { return radii_; }
  std::size_t angular_count() const { return n_; }
  std::size_t size() const { return radii_.size() * n_; }

  double angle(std::size_t j) const { return kTwoPi * static_cast<double>(j) / static_cast<double>(n_); }
  cplx unit(std::size_t j) const { return std::polar(1.0, angle(j)); }
  cplx point(std::size_t i, std::size_t j) const { return std::polar(radii_[i], angle(j)); }
  /// Row-major index, radius first.
  std::size_t index(std::size_t i, std::size_t j) const { return i * n_ + j; }

 private:
  std::vector<double> radii_;
  std::size_t n_;
};

bool is_power_of_two(std::size_t n);

}  // namespace loewner
