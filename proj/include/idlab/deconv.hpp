#pragma once

#include "idlab/games.hpp"
#include "idlab/model.hpp"
#include "idlab/numerics.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace idlab {

/// Discretized Gaussian index kernel: entry (z1 node, v node) is
/// phi(v / z2 - beta0 - beta1 z1) dv / |z2|. Throws when z2 = 0 or when some
/// row carries less than 0.999 of the probability mass.
Eigen::MatrixXd build_kernel_matrix(const IndexModel& index, std::size_t w, double z2, const Grid1D& z1_grid,
                                    const Grid1D& v_grid);

/// Regularized inverse of a row-stochastic kernel A (m x n) with an
/// unpenalized constant: x = R b, where the non-constant part minimizes the
/// first-difference seminorm under the chosen regularization. R maps the
/// constant vector to itself.
class KernelInverse {
 public:
  KernelInverse(const Eigen::MatrixXd& kernel, const Regularization& reg);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return map_ * rhs; }
  const Eigen::MatrixXd& map() const { return map_; }
  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const RegularizedInverse& core() const { return core_; }
  /// Expected residual norm for exact data given the recovered solution.
  double noise_floor(const Eigen::VectorXd& solution) const;
  double difference_floor(double difference_norm) const;

 private:
  Eigen::MatrixXd kernel_;
  RegularizedInverse core_;
  Eigen::MatrixXd map_;
};

struct DeconvOptions {
  Regularization reg = TruncatedSvd{};
  /// Explicit v grids (one per axis); defaults to mean range +/- sd_pad sd.
  std::vector<Grid1D> v_grids;
  int v_nodes = 161;
  double sd_pad = 4.0;
  /// Half-width (in sd) of the informative window around the mean range.
  double support_pad = 2.0;
  double overshoot_tolerance = 0.1;
  double misspec_factor = 5.0;
  /// Recovered outcomes Y* as labels; empty means all (single agent) or
  /// {"00", "11"} (games).
  std::vector<std::string> outcomes;
};

/// Recovered h(y, w, v) for the outcomes in Y*, on one or two v axes.
struct ChoiceKernel {
  std::vector<std::string> outcomes;
  std::string w;
  /// z2 point the kernel belongs to; -1 when pooled over all z2 points.
  int z2_index = -1;
  std::vector<Grid1D> v_axes;
  /// One matrix per outcome: n1 x 1, or n1 x n2 for games.
  std::vector<Eigen::MatrixXd> values;
  /// Informative window per axis, [lo, hi].
  std::vector<std::pair<double, double>> support;

  int outcome_position(const std::string& label) const;
  GriddedFn as_gridded(std::size_t k) const { return GriddedFn(v_axes, values.at(k)); }
};

struct DeconvDiagnostics {
  std::vector<Eigen::VectorXd> singular_values;  // per axis, of the reduced operator
  std::string regularization;
  std::vector<int> rank;                          // per axis
  std::vector<double> first_discarded;            // per axis
  std::vector<double> residual_norm;              // per outcome
  std::vector<double> noise_floor;                // per outcome
  double overshoot = 0.0;                         // max pre-correction excursion outside [0, 1]
  double min_row_mass = 1.0;
  bool sum_projected = false;                     // Y* = Y: simplex projection instead of clipping
  bool misspecified = false;
  bool overshoot_exceeded = false;

  bool failed() const { return misspecified || overshoot_exceeded; }
};

struct KernelRecovery {
  ChoiceKernel kernel;
  DeconvDiagnostics diagnostics;
};

/// How the index enters a single-agent kernel.
enum class KernelLayout {
  /// v = z2 (beta0 + beta1 z1 + e); all z2 points share one h (binary).
  PooledScaled,
  /// v = beta0 + beta1 z1 + e; one h per z2 point (multinomial, bundles).
  PerPoint,
};

KernelLayout default_layout(Family family);

/// Single-agent inversion: one recovery per w (pooled) or per (w, z2).
std::vector<KernelRecovery> recover_h(const CCPTable& mu, const IndexModel& index, KernelLayout layout,
                                      const DeconvOptions& options = {});

/// Two-player inversion on the (v1, v2) plane, one recovery per w.
std::vector<KernelRecovery> recover_h_game(const CCPTable& mu, const std::array<IndexModel, 2>& index,
                                           const DeconvOptions& options = {});

struct GammaEstimate {
  bool step = false;
  std::optional<double> gamma;
  double crossing = 0.0;
  double band_violation = 0.0;
};

/// Tests h(1, w, .) for a 0 -> 1 step within `band` and locates gamma(w) = -crossing.
GammaEstimate recover_gamma(const ChoiceKernel& h, double band = 0.1, double transition_halfwidth = 0.5);

/// Linear-interpolated crossings of `level` by `values` over `grid`, restricted to [lo, hi].
std::vector<double> level_crossings(const Eigen::VectorXd& values, const Grid1D& grid, double level, double lo,
                                    double hi);

}  // namespace idlab
