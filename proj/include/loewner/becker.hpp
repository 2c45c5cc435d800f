#pragma once

// Becker's extension F(rho e^{i theta}) = f_{log rho}(e^{i theta}) on grids,
// the Fourier classifier for Becker extensions, and recovery of the Herglotz
// function from a Becker extension's Beltrami coefficient.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loewner/chains.hpp"
#include "loewner/grids.hpp"

namespace loewner {

struct BoundarySettings {
  /// Radii 1 - delta 2^{-j}, j = 0..levels.
  double delta = 0.02;
  std::size_t levels = 4;
  /// Largest admissible extrapolation residual.
  double tolerance = 5e-4;
  /// Also compute the seam traces (costs (levels + 1)^2 chain values per angle).
  bool seam = true;
};

struct BoundaryValue {
  cplx value;
  double residual;
};

/// Neville extrapolation of samples v(h_j) to h = 0; the residual is the gap
/// between the two highest-order estimates.
BoundaryValue extrapolate_to_zero(std::span<const double> h, std::span<const cplx> v);

/// f_t(e^{i theta}) from f_t((1 - delta 2^{-j}) e^{i theta}).
BoundaryValue boundary_value(const ChainEvaluator& chain, double t, double theta, const BoundarySettings& settings);

/// Fills interior rows with f_0 and exterior rows with boundary values of
/// f_{log rho}. Throws validation if p fails Becker's condition for k, and
/// boundary-resolution if a residual or the seam gap exceeds the tolerance.
QCExtensionGrid becker_extend(const ChainEvaluator& chain, const PolarGrid& grid, double k,
                              const BoundarySettings& settings = {});

/// a_n = (1/N) sum_j trace_j e^{-i n theta_j}, returned for n = -N/2 .. N/2 - 1
/// (index n + N/2).
std::vector<cplx> circle_fourier(std::span<const cplx> trace);

struct CircleCoefficients {
  double rho;
  std::vector<cplx> a;  // n = -N/2 .. N/2 - 1
  cplx coefficient(int n) const { return a[static_cast<std::size_t>(n + static_cast<int>(a.size() / 2))]; }
};

struct BeckerReport {
  bool is_becker = false;
  double tolerance = 0.0;
  std::vector<CircleCoefficients> circles;
  int worst_n = 0;
  double worst_rho = 0.0;
  double worst_abs = 0.0;
  double max_abs_mu = 0.0;
  std::string assumption = "F is taken to be a quasiconformal homeomorphism of the plane fixing infinity";
};

/// Uses circles with rho > 1 (at least 3, N >= 64). Default tolerance: 1e-9
/// for exact fields, max(1e-3, error estimate) for numerical ones.
BeckerReport classify_becker(const BeltramiField& field, std::optional<double> tolerance = std::nullopt);

struct RecoveredHerglotz {
  HerglotzSpec spec;
  /// max over circles of sup |phi_rho| = sup |sum_{n>=2} a_n zeta^{n-2}|
  double k_observed = 0.0;
  std::vector<double> times;                  // log rho per circle
  std::vector<std::vector<cplx>> series;      // a_2, a_3, ... per circle
  double noise_floor = 0.0;                   // max_{n<=1} |a_n|
  double tail = 0.0;                          // max |a_n| for n >= 3N/8
};

/// p(z, t) = (1 + g)/(1 - g), g = sum_{n>=2} a_n(e^t) z^{n-2}. Coefficients
/// are linear in t between circles and held constant outside. Coefficients
/// not above the n <= 1 noise floor are dropped.
RecoveredHerglotz recover_herglotz_from_mu(const BeltramiField& field, double tail_tolerance = 1e-5);

}  // namespace loewner
