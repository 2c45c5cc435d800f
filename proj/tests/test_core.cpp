#include <doctest.h>

#include <random>

#include "loewner/core.hpp"

using namespace loewner;

namespace {

cplx random_point(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  return {u(rng), u(rng)};
}

MobiusTransform random_mobius(std::mt19937_64& rng) {
  while (true) {
    MobiusTransform m(random_point(rng, 2), random_point(rng, 2), random_point(rng, 2), random_point(rng, 2));
    if (std::abs(m.determinant()) > 0.1) return m;
  }
}

// Half-plane distance by integrating |dw| / (2 Re w) along the straight segment
// joining two real points (the real axis is a geodesic).
double segment_distance(double a, double b) {
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * (i + 0.5) / n;
    sum += 1.0 / (2.0 * x);
  }
  return sum * std::abs(b - a) / n;
}

}  // namespace

TEST_CASE("mobius evaluation examples") {
  CHECK(std::abs(MobiusTransform::identity().eval({0.3, 0.1}) - cplx(0.3, 0.1)) == 0.0);
  CHECK(std::abs(MobiusTransform::disk_automorphism(0.5).eval(0.5)) == 0.0);
  CHECK(std::abs(MobiusTransform::cayley().eval({0.0, 1.0}) - cplx(0.0, 1.0)) < 1e-15);
}

TEST_CASE("mobius rejects degenerate coefficients and handles poles") {
  CHECK_THROWS_AS(MobiusTransform(1.0, 2.0, 2.0, 4.0), Error);
  const MobiusTransform c = MobiusTransform::cayley();
  CHECK(c(ExtendedPoint(1.0)).is_infinite());
  CHECK(std::abs(c(ExtendedPoint::infinity()).value() + 1.0) < 1e-15);
  CHECK_THROWS_AS(c.eval(1.0), Error);
}

TEST_CASE("mobius composition closure on random triples") {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const MobiusTransform f = random_mobius(rng), g = random_mobius(rng);
    const cplx z = random_point(rng, 1.0);
    const cplx gz = g.eval(z);
    if (std::abs(f.c() * gz + f.d()) < 1e-3 || std::abs(g.c() * z + g.d()) < 1e-3) continue;
    const cplx lhs = (f * g).eval(z), rhs = f.eval(gz);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("mobius inverse and projective equality") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const MobiusTransform m = random_mobius(rng);
    CHECK((m.inverse() * m).projectively_equal(MobiusTransform::identity()));
  }
}

TEST_CASE("cross-ratio is preserved by mobius maps") {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const MobiusTransform m = random_mobius(rng);
    std::array<cplx, 4> z, w;
    for (auto& p : z) p = random_point(rng, 1.0);
    bool ok = true;
    for (int j = 0; j < 4; ++j) {
      if (std::abs(m.c() * z[j] + m.d()) < 1e-2) ok = false;
      for (int l = 0; l < j; ++l) if (std::abs(z[j] - z[l]) < 1e-2) ok = false;
    }
    if (!ok) continue;
    for (int j = 0; j < 4; ++j) w[j] = m.eval(z[j]);
    const cplx a = cross_ratio(z[0], z[1], z[2], z[3]), b = cross_ratio(w[0], w[1], w[2], w[3]);
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("three-point fit reproduces the map") {
  const MobiusTransform m(cplx(1, 2), cplx(0.5, 0), cplx(0.1, -0.3), cplx(2, 0));
  const std::array<cplx, 3> z{cplx(0, 0), cplx(0.5, 0), cplx(0, 0.5)};
  const std::array<cplx, 3> w{m.eval(z[0]), m.eval(z[1]), m.eval(z[2])};
  CHECK(MobiusTransform::from_three_points(z, w).projectively_equal(m, 1e-10));
}

TEST_CASE("half-plane chart examples") {
  CHECK(std::abs(HalfPlaneChart(1.0).forward(0.0) - 1.0) == 0.0);
  CHECK(std::abs(HalfPlaneChart(cplx(2, 1)).forward(0.0) - cplx(2, 1)) < 1e-15);
  CHECK(std::abs(HalfPlaneChart(1.0).inverse(3.0) - 0.5) < 1e-15);
  CHECK_THROWS_AS(HalfPlaneChart(cplx(0.0, 1.0)), Error);
  CHECK_THROWS_AS(HalfPlaneChart(-1.0), Error);
}

TEST_CASE("half-plane chart round trip and unit circle image") {
  const HalfPlaneChart h(cplx(0.7, -0.4));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    cplx z = random_point(rng, 0.7);
    CHECK(std::abs(h.inverse(h.forward(z)) - z) < 1e-12);
  }
  for (int j = 1; j < 16; ++j) {
    const cplx w = h.forward(std::polar(1.0 - 1e-15, kTwoPi * j / 16));
    CHECK(std::abs(w.real()) < 1e-6);
  }
}

TEST_CASE("chart maps circles to hyperbolic circles about the centre") {
  const cplx a(1.5, 0.3);
  const HalfPlaneChart h(a);
  for (double r : {0.2, 0.5, 0.9}) {
    double lo = 1e300, hi = 0.0;
    for (int j = 0; j < 128; ++j) {
      const double d = hyperbolic_distance_halfplane(a, h.forward(std::polar(r, kTwoPi * j / 128)));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    CHECK(std::abs(lo - hyperbolic_radius(r)) < 1e-9);
    CHECK(std::abs(hi - hyperbolic_radius(r)) < 1e-9);
  }
}

TEST_CASE("becker disk membership") {
  const BeckerDisk d(0.5);
  CHECK(d.contains(1.0));
  CHECK(d.contains(3.0));
  CHECK_FALSE(d.contains(-1.0));
  CHECK(BeckerDisk(0.0).contains(1.0));
  CHECK_FALSE(BeckerDisk(0.0).contains(1.0 + 1e-9));
  CHECK_THROWS_AS(BeckerDisk(1.0), Error);
}

TEST_CASE("half-plane distance examples against segment integration") {
  CHECK(hyperbolic_distance_halfplane(1.0, 1.0) == 0.0);
  CHECK(std::abs(hyperbolic_distance_halfplane(1.0, 3.0) - 0.5 * std::log(3.0)) < 1e-14);
  CHECK(std::abs(hyperbolic_distance_halfplane(1.0, 3.0) - segment_distance(1.0, 3.0)) < 1e-8);
  CHECK(std::abs(BeckerDisk(0.5).hyperbolic_radius() - 0.5 * std::log(3.0)) < 1e-15);
  CHECK_THROWS_AS(hyperbolic_distance_halfplane(-1.0, 1.0), Error);
}

TEST_CASE("two descriptions of the Becker disk agree") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> re(0.01, 6.0), im(-4.0, 4.0);
  for (double k : {0.1, 0.5, 0.9}) {
    const BeckerDisk d(k);
    for (int i = 0; i < 2000; ++i) {
      const cplx w(re(rng), im(rng));
      const double dist = hyperbolic_distance_halfplane(1.0, w);
      if (std::abs(dist - d.hyperbolic_radius()) < 1e-12) continue;
      CHECK(d.contains(w) == (dist <= d.hyperbolic_radius()));
    }
  }
}

TEST_CASE("polar grid shape and validation") {
  const PolarGrid g({0.5, 1.0, 2.0}, 8);
  CHECK(g.size() == 24);
  CHECK(g.angle(0) == 0.0);
  CHECK(std::abs(g.angle(7) - kTwoPi * 7 / 8) < 1e-15);
  CHECK(g.index(1, 3) == 11);
  CHECK_THROWS_AS(PolarGrid({}, 8), Error);
  CHECK_THROWS_AS(PolarGrid({0.5, 0.5}, 8), Error);
  CHECK_THROWS_AS(PolarGrid({0.5}, 12), Error);
}
