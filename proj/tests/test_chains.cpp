#include <doctest.h>

#include <random>

#include "loewner/chains.hpp"

using namespace loewner;

namespace {

VectorField radial(HerglotzSpec p) { return assemble_vector_field(DrivingSpec::constant(0.0), std::move(p)); }

std::vector<cplx> disk_points(double r_max, int rings, int angles) {
  std::vector<cplx> out;
  for (int i = 1; i <= rings; ++i) {
    for (int j = 0; j < angles; ++j) out.push_back(std::polar(r_max * i / rings, kTwoPi * (j + 0.5 * i) / angles));
  }
  return out;
}

// Gauss-Legendre free check: composite Simpson on a substituted variable.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("identity chain") {
  const ChainEvaluator c(radial(HerglotzSpec::constant(1.0)));
  CHECK(std::abs(chain_eval(c, 0.0, 0.5) - 0.5) < 1e-12);
  for (double s : {0.5, 2.0}) {
    CHECK(std::abs(chain_eval(c, s, cplx(0.3, 0.2)) - std::exp(s) * cplx(0.3, 0.2)) < 1e-9 * std::exp(s));
  }
}

TEST_CASE("koebe-type chains match their closed forms") {
  const double k = 0.5;
  const ChainEvaluator c1(radial(HerglotzSpec::koebe(k)));
  const ChainEvaluator c2(radial(HerglotzSpec::koebe(k, 2)));
  double worst1 = 0.0, worst2 = 0.0;
  for (cplx z : disk_points(0.9, 4, 16)) {
    worst1 = std::max(worst1, std::abs(chain_eval(c1, 0.0, z) - z / ((1.0 - k * z) * (1.0 - k * z))));
    worst2 = std::max(worst2, std::abs(chain_eval(c2, 0.0, z) - z / (1.0 - k * z * z)));
  }
  CHECK(worst1 <= 1e-6);
  CHECK(worst2 <= 1e-6);
  const cplx z(0.3, -0.6);
  CHECK(std::abs(chain_eval(c1, 1.5, z) - std::exp(1.5) * chain_eval(c1, 0.0, z)) < 1e-8 * std::exp(1.5));
}

TEST_CASE("convergence profile examples") {
  const std::vector<double> times{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const ChainEvaluator id(radial(HerglotzSpec::constant(1.0)));
  std::vector<double> later;
  for (double t : times) later.push_back(0.5 + t);
  for (const auto& e : chain_convergence_profile(id, 0.5, cplx(0.2, 0.1), later)) {
    CHECK(std::abs(e.value - std::exp(0.5) * cplx(0.2, 0.1)) < 1e-9);
  }

  const ChainEvaluator koebe(radial(HerglotzSpec::koebe(0.5)));
  const auto profile = chain_convergence_profile(koebe, 0.0, 0.6, times);
  REQUIRE(profile.size() == times.size());
  CHECK(profile.front().increment == cplx(0.0));
  // Increments shrink monotonically; after the first unit step the ratio stays
  // in [0.2, 0.6] and settles on e^{-1}.
  for (std::size_t i = 2; i < profile.size(); ++i) {
    const double ratio = std::abs(profile[i].increment) / std::abs(profile[i - 1].increment);
    CAPTURE(i);
    CHECK(ratio < 1.0);
    if (i >= 3) {
      CHECK(ratio >= 0.2);
      CHECK(ratio <= 0.6);
    }
  }
  const double last = std::abs(profile[10].increment) / std::abs(profile[9].increment);
  CHECK(std::abs(last - std::exp(-1.0)) < 1e-3);
  const cplx limit = 0.6 / ((1.0 - 0.3) * (1.0 - 0.3));
  for (const auto& e : profile) CHECK(std::abs(e.value - limit) <= 2.0 * std::exp(-e.t));

  const auto [p, tau] = essential_example_driving(RhoProfile::tanh_sqrt());
  const ChainEvaluator essential(assemble_vector_field(tau, p), {40.0, 1e-9, ChainMode::mobius});
  CHECK(essential.heuristic());
  CHECK(chain_convergence_profile(essential, 0.0, 0.3, times).size() == times.size());
}

TEST_CASE("chain and evolution family are compatible") {
  for (ChainMode mode : {ChainMode::radial, ChainMode::mobius}) {
    CAPTURE(to_string(mode));
    const ChainEvaluator c(radial(HerglotzSpec::koebe(0.5)), {40.0, 1e-9, mode});
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> time(0.0, 3.0), mod(0.0, 0.8), arg(0.0, kTwoPi);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      double s = time(rng), t = time(rng);
      if (s > t) std::swap(s, t);
      const cplx z = std::polar(mod(rng), arg(rng));
      const cplx lhs = chain_eval(c, t, c.trajectory().evolve_point(s, t, z));
      worst = std::max(worst, std::abs(lhs - chain_eval(c, s, z)) / std::exp(s));
    }
    CHECK(worst <= 10.0 * c.settings().tolerance);
  }
}

TEST_CASE("mobius mode agrees with radial mode on radial fields") {
  const ChainEvaluator r(radial(HerglotzSpec::koebe(0.4, 3)), {40.0, 1e-9, ChainMode::radial});
  const ChainEvaluator m(radial(HerglotzSpec::koebe(0.4, 3)), {40.0, 1e-9, ChainMode::mobius});
  for (cplx z : disk_points(0.8, 2, 8)) CHECK(std::abs(chain_eval(r, 0.0, z) - chain_eval(m, 0.0, z)) < 1e-8);
}

TEST_CASE("standard normalization") {
  const std::vector<VectorField> fields{
      radial(HerglotzSpec::koebe(0.5)),
      assemble_vector_field(DrivingSpec::rotating(0.5, 1.0), HerglotzSpec::koebe(0.3)),
  };
  for (const auto& g : fields) {
    CAPTURE(g.describe());
    const ChainEvaluator c(g, {40.0, 1e-9, g.radial() ? ChainMode::radial : ChainMode::mobius});
    CHECK(std::abs(chain_eval(c, 0.0, 0.0)) < 1e-9);
    const double h = 1e-4;
    const cplx d = (chain_eval(c, 0.0, h) - chain_eval(c, 0.0, -h)) / (2.0 * h);
    CHECK(std::abs(d - 1.0) < 1e-6);
  }
}

TEST_CASE("nesting probe by Newton iteration") {
  const ChainEvaluator c(radial(HerglotzSpec::koebe(0.5)));
  const double s = 0.3, t = 1.2;
  for (cplx z : disk_points(0.8, 2, 6)) {
    const cplx target = chain_eval(c, s, z);
    cplx w = c.trajectory().evolve_point(s, t, z) * (1.0 + 1e-3);
    double residual = 0.0;
    for (int it = 0; it < 30; ++it) {
      const double h = 1e-6;
      const cplx f = chain_eval(c, t, w) - target;
      residual = std::abs(f);
      if (residual < 1e-11) break;
      const cplx d = (chain_eval(c, t, w + h) - chain_eval(c, t, w - h)) / (2.0 * h);
      w -= f / d;
    }
    CHECK(std::abs(w) < 1.0);
    CHECK(residual <= 1e-8);
  }
}

TEST_CASE("range diagnostic for the identity field") {
  const RangeReport r = range_diagnostic(radial(HerglotzSpec::constant(1.0)), 20.0);
  CHECK(r.verdict == RangeVerdict::plane);
  CHECK(r.integral_estimate == doctest::Approx(20.0).epsilon(1e-12));
  for (const auto& s : r.samples) {
    CHECK(s.a == cplx(0.0));
    CHECK(std::abs(s.re_q - 1.0) < 1e-12);
    CHECK(std::abs(s.decay - std::exp(-s.t)) < 1e-8);
  }
}

TEST_CASE("range diagnostic derivative decay on radial fields with p(0,t) = 1") {
  const RangeReport r = range_diagnostic(radial(HerglotzSpec::koebe(0.7, 2)), 15.0);
  for (const auto& s : r.samples) CHECK(std::abs(s.decay - std::exp(-s.t)) < 1e-8);
}

TEST_CASE("essential example driving") {
  for (const RhoProfile& rho : {RhoProfile::tanh_sqrt(), RhoProfile::sqrt_ratio()}) {
    CAPTURE(rho.name);
    const auto [p, tau] = essential_example_driving(rho);
    for (double t : {0.0, 1e-6, 0.5, 1.0, 7.0, 30.0}) {
      CHECK(std::abs(std::abs(tau(t)) - 1.0) < 1e-14);
      if (t > 0.0) CHECK(std::abs(p(cplx(0.2, -0.5), t).real() - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("essential angle against independent quadrature") {
  // theta(t) = int_0^t (1 - rho^2)^2 / ((1 + rho^2) rho) ds with s = u^2 removing the singularity.
  const RhoProfile rho = RhoProfile::tanh_sqrt();
  const EssentialAngle theta(rho);
  for (double t : {0.5, 1.0, 2.0}) {
    const double expected = simpson(
        [&](double u) {
          if (u == 0.0) return 2.0;
          const double r = std::tanh(u);
          return 2.0 * u * (1.0 - r * r) * (1.0 - r * r) / ((1.0 + r * r) * r);
        },
        0.0, std::sqrt(t), 4000);
    CHECK(std::abs(theta(t) - expected) < 1e-10);
  }
}

TEST_CASE("inverse rho integral detects divergence") {
  CHECK(inverse_rho_integral(RhoProfile::tanh_sqrt()).convergent);
  CHECK(inverse_rho_integral(RhoProfile::sqrt_ratio()).convergent);
  const RhoProfile linear{"linear", [](double t) { return t / (1.0 + t); }, [](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); }};
  CHECK_FALSE(inverse_rho_integral(linear).convergent);
  CHECK_THROWS_AS(essential_example_driving(linear), Error);
}

TEST_CASE("range diagnostic for the tanh profile is disk-like") {
  const RhoProfile rho = RhoProfile::tanh_sqrt();
  const auto [p, tau] = essential_example_driving(rho);
  const RangeReport r = range_diagnostic(assemble_vector_field(tau, p), 64.0);
  CHECK(r.verdict == RangeVerdict::disk_like);
  CHECK(r.final_decay > 1e-3);
  // int_0^inf sech^2(sqrt t) dt = 2 ln 2 (substitute t = u^2).
  const double oracle = simpson([](double u) { return 2.0 * u / (std::cosh(u) * std::cosh(u)); }, 0.0, 40.0, 40000);
  CHECK(std::abs(oracle - 2.0 * std::log(2.0)) < 1e-10);
  CHECK(std::abs(r.integral_estimate - oracle) < 1e-3);
}
