#pragma once

#include "idlab/deconv.hpp"
#include "idlab/games.hpp"

#include <optional>
#include <string>
#include <vector>

namespace idlab {

// ---- F_g on the ray set ----------------------------------------------------

/// F_g sampled along r = lambda * direction (unit direction).
struct Ray {
  int z2_index = -1;
  Eigen::VectorXd direction;
  Eigen::VectorXd lambda;  // increasing
  Eigen::VectorXd raw;     // before rearrangement
  Eigen::VectorXd cdf;     // after rearrangement
  /// +1: every coordinate of direction > 0 (F non-decreasing in lambda);
  /// -1: every coordinate < 0; 0: no order along the ray.
  int orientation = 0;
  double max_drop = 0.0;      // largest monotonicity violation before rearrangement
  double perturbation = 0.0;  // max |cdf - raw|
};

struct RaySetCDF {
  std::string w;
  std::vector<Ray> rays;
  double max_drop = 0.0;
  double max_perturbation = 0.0;
  bool violation = false;
};

/// h(0, w, v) = F_g(-a v) with a the signed index loadings of each z2 point.
/// `kernels[k]` holds the outside-option kernel for loading `loadings[k]`;
/// only nodes inside the kernel's informative window are sampled.
RaySetCDF recover_fg(const std::vector<ChoiceKernel>& kernels, const std::vector<Eigen::VectorXd>& loadings,
                     const std::string& outside_label, double tolerance = 0.05);

// ---- game thresholds, concept, payoffs -------------------------------------

enum class OutcomePair { ZeroZeroOneOne, ZeroZeroOneZero };

struct ThresholdEstimate {
  OutcomePair pair = OutcomePair::ZeroZeroOneOne;
  Eigen::Vector2d outer = Eigen::Vector2d::Constant(NAN);
  Eigen::Vector2d inner = Eigen::Vector2d::Constant(NAN);
  double spacing = 0.0;  // coarsest v-grid spacing
};

/// 0.5-level crossings of h(00) along lines deep in the other player's
/// exit region (outer thresholds) and of h(11) along lines deep in the
/// other player's entry region (inner thresholds). With the (00, 10) pair
/// only player 2's inner threshold is available.
ThresholdEstimate detect_thresholds(const ChoiceKernel& h2);

struct PayoffEstimate {
  std::optional<Eigen::Vector2d> alpha;
  std::optional<Eigen::Vector2d> delta;  // (delta_12, delta_21)
  std::optional<double> delta_sum;
  std::optional<Eigen::Vector2d> composite;  // alpha_i + min(delta_ij, 0)
};

struct ConceptReport {
  std::optional<Concept> solution;
  std::vector<Concept> candidates;
  ThresholdEstimate thresholds;
  Eigen::Vector2d widths = Eigen::Vector2d::Constant(NAN);
  double squareness = NAN;
  double tolerance = 0.0;
  PayoffEstimate payoffs;
  std::string note;
};

/// minimax iff both widths vanish; else collusion iff the widths agree
/// (square kink region); else rationalizability. tolerance <= 0 uses two
/// grid spacings.
ConceptReport classify_concept(const ThresholdEstimate& t, double tolerance = 0.0);

PayoffEstimate recover_payoffs(Concept solution, const ThresholdEstimate& t, double tolerance);

}  // namespace idlab
