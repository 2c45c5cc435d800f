#pragma once

// Sampled planar maps and Beltrami coefficients on polar grids.

#include <optional>
#include <vector>

#include "loewner/core.hpp"

namespace loewner {

/// Interior and exterior boundary traces at |z| = 1.
struct SeamTrace {
  std::vector<cplx> interior;  // radial limit of f_0 from inside
  std::vector<cplx> exterior;  // rho -> 1+ limit of the exterior values
  double discrepancy = 0.0;
  double worst_theta = 0.0;
  double tolerance = 0.0;
};

/// Values of F on a polar grid whose radii may straddle the unit circle:
/// rows with rho < 1 hold f_0, rows with rho >= 1 hold f_{log rho}(e^{i theta}).
struct QCExtensionGrid {
  explicit QCExtensionGrid(PolarGrid g) : grid(std::move(g)), values(grid.size()), residuals(grid.size(), 0.0) {}

  PolarGrid grid;
  std::vector<cplx> values;
  /// Boundary-extrapolation residual per node (0 for interior nodes).
  std::vector<double> residuals;
  std::optional<SeamTrace> seam;
  double worst_residual = 0.0;
  double worst_residual_theta = 0.0;
  /// Largest |F(rho_{i+1}, theta) - F(rho_i, theta)| over adjacent exterior rows.
  double max_radial_jump = 0.0;
  double radial_jump_bound = 0.0;
  double k = 0.0;

  cplx at(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
  bool radially_continuous() const { return max_radial_jump <= radial_jump_bound; }
};

/// mu = dbar F / d F sampled on circles at theta_j = 2 pi j / N.
struct BeltramiField {
  std::vector<double> radii;
  std::size_t angular_count = 0;
  std::vector<std::vector<cplx>> traces;
  double max_dilatation = 0.0;
  bool jacobian_sign_ok = true;
  /// min over samples of (|dF|^2 - |dbar F|^2) / |dF|^2 = 1 - |mu|^2
  double min_jacobian_ratio = 1.0;
  /// Closed-form traces (classified at 1e-9) versus numerically produced ones.
  bool exact = false;
  /// Estimated error of the traces (0 for exact fields).
  double error_estimate = 0.0;

  /// Validates shape (non-empty, constant power-of-two length) and fills the
  /// dilatation summaries.
  static BeltramiField from_traces(std::vector<double> radii, std::vector<std::vector<cplx>> traces, bool exact,
                                   double error_estimate = 0.0);
};

}  // namespace loewner
