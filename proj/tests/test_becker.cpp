#include <doctest.h>

#include <random>

#include "loewner/analysis.hpp"

using namespace loewner;

namespace {

std::shared_ptr<const ChainEvaluator> radial_chain(HerglotzSpec p) {
  return std::make_shared<const ChainEvaluator>(assemble_vector_field(DrivingSpec::constant(0.0), std::move(p)));
}

BeltramiField trace_field(const std::vector<double>& radii, std::size_t n, const std::function<cplx(double, double)>& mu,
                          bool exact = true) {
  std::vector<std::vector<cplx>> traces;
  for (double rho : radii) {
    std::vector<cplx> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = mu(rho, kTwoPi * static_cast<double>(j) / static_cast<double>(n));
    traces.push_back(std::move(row));
  }
  return BeltramiField::from_traces(radii, std::move(traces), exact);
}

// Naive O(N^2) trapezoid rule for a_n.
cplx direct_coefficient(const std::vector<cplx>& trace, int n) {
  cplx sum{};
  const double count = static_cast<double>(trace.size());
  for (std::size_t j = 0; j < trace.size(); ++j) sum += std::polar(1.0, -n * kTwoPi * static_cast<double>(j) / count) * trace[j];
  return sum / count;
}

double max_low_mode(const CircleCoefficients& c) {
  double worst = 0.0;
  for (int n = -static_cast<int>(c.a.size() / 2); n <= 1; ++n) worst = std::max(worst, std::abs(c.coefficient(n)));
  return worst;
}

}  // namespace

TEST_CASE("Richardson extrapolation to the boundary") {
  const std::vector<double> h{0.02, 0.01, 0.005, 0.0025, 0.00125};
  std::vector<cplx> v;
  for (double x : h) v.push_back(cplx(1.0, 2.0) + 3.0 * x - 5.0 * x * x);
  const auto b = extrapolate_to_zero(h, v);
  CHECK(std::abs(b.value - cplx(1.0, 2.0)) < 1e-13);
  CHECK(b.residual < 1e-12);
}

TEST_CASE("Becker extension of the koebe-type chain") {
  const double k = 0.5;
  const auto chain = radial_chain(HerglotzSpec::koebe(k));
  const QCExtensionGrid grid = becker_extend(*chain, PolarGrid({0.5, 1.2, 2.0}, 64), k);
  double worst_outer = 0.0, worst_inner = 0.0;
  for (std::size_t j = 0; j < 64; ++j) {
    const cplx u = grid.grid.unit(j);
    worst_inner = std::max(worst_inner, std::abs(grid.at(0, j) - 0.5 * u / std::pow(1.0 - 0.5 * k * u, 2)));
    for (std::size_t i : {1u, 2u}) {
      const cplx z = grid.grid.point(i, j);
      worst_outer = std::max(worst_outer, std::abs(grid.at(i, j) - z / std::pow(1.0 - k * u, 2)));
    }
  }
  CHECK(worst_inner < 1e-6);
  CHECK(worst_outer < 1e-5);
  CHECK(grid.worst_residual <= 5e-4);
  REQUIRE(grid.seam.has_value());
  CHECK(grid.seam->discrepancy < 1e-5);
  CHECK(grid.radially_continuous());
}

TEST_CASE("Becker extension of the identity chain") {
  const auto chain = radial_chain(HerglotzSpec::constant(1.0));
  const QCExtensionGrid grid = becker_extend(*chain, PolarGrid({0.3, 0.9, 1.1, 3.0}, 64), 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 64; ++j) CHECK(std::abs(grid.at(i, j) - grid.grid.point(i, j)) < 1e-8);
  }
}

TEST_CASE("Becker extension input validation") {
  const auto chain = radial_chain(HerglotzSpec::koebe(0.5));
  CHECK_THROWS_AS(becker_extend(*chain, PolarGrid({1.2, 2.0}, 64), 0.5), Error);
  CHECK_THROWS_AS(becker_extend(*chain, PolarGrid({0.5, 2.0}, 64), 0.3), Error);
}

TEST_CASE("circle Fourier examples") {
  const std::size_t n = 64;
  std::vector<cplx> trace(n), zero(n), conj(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double th = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    trace[j] = -0.5 * std::polar(1.0, 3.0 * th);
    conj[j] = 0.5 * std::polar(1.0, -th);
  }
  const auto a = circle_fourier(trace);
  REQUIRE(a.size() == n);
  for (int m = -32; m < 32; ++m) {
    const cplx c = a[static_cast<std::size_t>(m + 32)];
    if (m == 3) CHECK(std::abs(c + 0.5) < 1e-15);
    else CHECK(std::abs(c) <= 1e-15);
  }
  for (cplx c : circle_fourier(zero)) CHECK(c == cplx(0.0));
  CHECK(std::abs(circle_fourier(conj)[31] - 0.5) < 1e-15);
}

TEST_CASE("circle Fourier matches the direct trapezoid sum") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  std::vector<cplx> trace(128);
  for (auto& v : trace) v = {g(rng), g(rng)};
  const auto a = circle_fourier(trace);
  for (int m = -64; m < 64; ++m) CHECK(std::abs(a[static_cast<std::size_t>(m + 64)] - direct_coefficient(trace, m)) < 1e-13);
}

TEST_CASE("classifier on closed-form fields") {
  const double k = 0.5;
  const std::vector<double> radii{1.1, 1.5, 2.0, 4.0, 8.0};
  const auto becker = classify_becker(trace_field(radii, 256, [&](double, double th) { return -k * std::polar(1.0, 3.0 * th); }));
  CHECK(becker.is_becker);
  CHECK(becker.tolerance == 1e-9);
  for (const auto& c : becker.circles) {
    CHECK(max_low_mode(c) <= 1e-9);
    CHECK(std::abs(c.coefficient(3) + k) <= 1e-12);
  }

  const auto conj = classify_becker(trace_field(radii, 256, [&](double, double th) { return k * std::polar(1.0, -th); }));
  CHECK_FALSE(conj.is_becker);
  CHECK(conj.worst_n == -1);
  CHECK(std::abs(conj.worst_abs - k) <= 1e-12);
  for (const auto& c : conj.circles) CHECK(std::abs(c.coefficient(-1) - k) <= 1e-12);
}

TEST_CASE("classifier on the f-sigma field") {
  const double sigma = 1.5;
  const auto field = trace_field({1.5, 2.0, 4.0, 8.0}, 256, [&](double rho, double th) {
    const cplx zeta = std::polar(1.0, th);
    return (sigma - 1.0) * zeta * zeta * (rho * rho * zeta * zeta - 1.0) / (rho * rho - zeta * zeta);
  });
  CHECK(classify_becker(field).is_becker);
}

TEST_CASE("classifier preconditions") {
  const auto mu = [](double, double th) { return -0.5 * std::polar(1.0, 3.0 * th); };
  CHECK_THROWS_AS(classify_becker(trace_field({1.5, 2.0}, 256, mu)), Error);
  CHECK_THROWS_AS(classify_becker(trace_field({1.5, 2.0, 3.0}, 32, mu)), Error);
  CHECK_THROWS_AS(classify_becker(trace_field({0.5, 2.0, 3.0}, 64, mu)), Error);
  try {
    classify_becker(trace_field({1.5, 2.0, 3.0}, 64, [](double, double th) { return 1.2 * std::polar(1.0, 3.0 * th); }));
    FAIL("expected a not-quasiconformal error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_quasiconformal);
  }
}

TEST_CASE("rotation covariance of coefficients and verdict") {
  const double alpha = kTwoPi / 8.0;
  const std::size_t n = 64;
  const std::vector<std::function<cplx(double, double)>> fields{
      [](double, double th) { return 0.3 * std::polar(1.0, 2.0 * th) - 0.2 * std::polar(1.0, 5.0 * th); },
      [](double rho, double th) { return 0.4 / rho * std::polar(1.0, -th) + cplx(0.0, 0.1) * std::polar(1.0, 3.0 * th); },
  };
  for (const auto& mu : fields) {
    const auto base = classify_becker(trace_field({1.5, 2.0, 3.0}, n, mu));
    const auto turned = classify_becker(trace_field({1.5, 2.0, 3.0}, n, [&](double rho, double th) { return mu(rho, th + alpha); }));
    CHECK(base.is_becker == turned.is_becker);
    for (std::size_t c = 0; c < 3; ++c) {
      for (int m = -32; m < 32; ++m) {
        const cplx expected = std::polar(1.0, m * alpha) * base.circles[c].coefficient(m);
        CHECK(std::abs(turned.circles[c].coefficient(m) - expected) < 1e-14);
      }
    }
  }
}

TEST_CASE("coefficient bound") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<cplx> coeffs(8);
  for (auto& c : coeffs) c = {u(rng), u(rng)};
  const auto field = trace_field({1.5, 2.0, 3.0}, 64, [&](double rho, double th) {
    cplx s{};
    for (std::size_t m = 0; m < coeffs.size(); ++m) s += coeffs[m] / rho * std::polar(1.0, (static_cast<double>(m) - 3.0) * th);
    return s;
  }, false);
  const auto report = classify_becker(field, 1e-3);
  for (std::size_t c = 0; c < report.circles.size(); ++c) {
    double sup = 0.0;
    for (cplx v : field.traces[c]) sup = std::max(sup, std::abs(v));
    for (cplx a : report.circles[c].a) CHECK(std::abs(a) <= sup + 1e-15);
  }
  CHECK(report.max_abs_mu == doctest::Approx(field.max_dilatation));
}

TEST_CASE("recovery from closed-form fields") {
  const double k = 0.5;
  const auto rec = recover_herglotz_from_mu(trace_field({1.5, 2.0, 3.0}, 128, [&](double, double th) { return -k * std::polar(1.0, 3.0 * th); }));
  CHECK(rec.k_observed == doctest::Approx(k).epsilon(1e-12));
  for (double t : {std::log(1.5), std::log(2.0), 0.8}) {
    for (cplx z : {cplx(0.0), cplx(0.5, 0.0), cplx(-0.3, 0.7)}) {
      CHECK(std::abs(rec.spec(z, t) - (1.0 - k * z) / (1.0 + k * z)) < 1e-12);
    }
  }
  CHECK(check_becker_condition(rec.spec, rec.k_observed, Sampling::standard(std::log(3.0), 4), 1e-9).satisfied);

  const auto zero = recover_herglotz_from_mu(trace_field({1.5, 2.0, 3.0}, 64, [](double, double) { return cplx(0.0); }));
  CHECK(std::abs(zero.spec(cplx(0.4, 0.4), 0.6) - 1.0) < 1e-15);
}

TEST_CASE("recovery rejects non-Becker and non-decaying fields") {
  CHECK_THROWS_AS(recover_herglotz_from_mu(trace_field({1.5, 2.0, 3.0}, 64, [](double, double th) { return 0.5 * std::polar(1.0, -th); })), Error);
  try {
    recover_herglotz_from_mu(trace_field({1.5, 2.0, 3.0}, 64, [](double, double th) { return 0.3 * std::polar(1.0, 30.0 * th); }));
    FAIL("expected a reconstruction-unstable error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::reconstruction_unstable);
  }
}

TEST_CASE("conformal chain yields a vanishing field") {
  const auto chain = radial_chain(HerglotzSpec::constant(1.0));
  const auto sampler = PlanarMapSampler::from_chain(chain);
  BeltramiOptions opt;
  opt.wirtinger.h = 1e-3;
  const BeltramiField field = beltrami_field(sampler, {1.5, 2.0, 3.0}, 64, opt);
  const auto report = classify_becker(field, 1e-3);
  for (const auto& c : report.circles) {
    for (cplx a : c.a) CHECK(std::abs(a) <= 1e-6);
  }
}

TEST_CASE("extensions built from Becker chains classify as Becker") {
  const double k = 0.5;
  const auto chain = radial_chain(HerglotzSpec::koebe(k, 2));
  const QCExtensionGrid grid = becker_extend(*chain, PolarGrid({0.5, 0.9, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7}, 128), k);
  const auto sampler = PlanarMapSampler::from_grid(grid);
  const BeltramiField field = beltrami_field(sampler, {1.3, 1.4, 1.5}, 128);
  const auto report = classify_becker(field, 1e-3);
  CHECK(report.is_becker);
  CHECK(report.max_abs_mu <= k + 1e-2);
}
