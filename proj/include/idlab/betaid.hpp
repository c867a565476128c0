#pragma once

#include "idlab/model.hpp"
#include "idlab/numerics.hpp"

#include <optional>
#include <string>

namespace idlab {

/// eta(z1, z2) = mu(y* | z1, z2), eta_tilde = z2 * eta, and the partials of
/// eta_tilde used by the identification identity (fourth-order stencils).
struct EtaSurface {
  std::string y_star;
  std::string w;
  GriddedFn eta;
  GriddedFn eta_tilde;
  GriddedFn d1;   // d/dz1
  GriddedFn d11;  // d^2/dz1^2
  GriddedFn d2;   // d/dz2
};

/// Surface from a CCP table whose z2 points are scalars on a uniform grid
/// that does not contain 0.
EtaSurface build_eta(const CCPTable& mu, const std::string& y_star, const std::string& w);
/// Surface from eta sampled on a (z1, z2) grid.
EtaSurface build_eta(const GriddedFn& eta);

struct DegeneracyReport {
  bool degenerate = true;
  double statistic = 0.0;
  int witness_z1 = -1;
  int witness_z2 = -1;
  std::string reason;
};

/// Non-degenerate iff max |d/dz1 (d11 / d1)| * L^2 over valid interior cells
/// exceeds tau_deg, where L is the z1 range.
DegeneracyReport check_degeneracy(const EtaSurface& s, double tau_deg = 1e-3, double tau_grad_rel = 1e-4);

struct BetaOptions {
  double tau_deg = 1e-3;
  double tau_grad_rel = 1e-4;
  double residual_tolerance = 0.05;
  double zero_ratio = 1e-3;
};

struct BetaEstimate {
  double beta1_sq = 0.0;
  double ratio = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  DegeneracyReport degeneracy;
  /// Identity residual per cell; NaN where the cell was not used.
  Eigen::MatrixXd residuals;
  double rms_residual = 0.0;
  int cells_used = 0;
  bool misspecified = false;
};

/// Least-squares fit of r + B s = A - z1 with r = beta0/beta1, s = 1/beta1^2,
/// then sign resolution from `sign`. Throws NumericalError on degenerate
/// surfaces or s <= 0.
BetaEstimate identify_beta(const EtaSurface& s, const SignInfo& sign, const BetaOptions& opt = {});

/// RMS identity residual at a candidate (ratio, beta1^2).
double identity_residual(const EtaSurface& s, double ratio, double beta1_sq, double tau_grad_rel = 1e-4);

struct SignVerdict {
  std::optional<int> sign;
  double slope = 0.0;
  int z2_index = -1;
};

/// Sign of beta1 from the slope of mu(0 | z1) at a z2 point with equal
/// coordinates; abstains when |slope| < tau.
SignVerdict identify_beta1_sign_multinomial(const CCPTable& mu, const std::string& w, double tau = 1e-4);

}  // namespace idlab
