#pragma once

#include "idlab/model.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace idlab {

enum class Concept { Minimax, Collusion, Rationalizability };

std::string to_string(Concept c);
Concept concept_from_string(const std::string& s);

/// Outcome indices for two players: 0 = (0,0), 1 = (1,0), 2 = (0,1), 3 = (1,1).
inline constexpr int outcome_code(int y1, int y2) { return y1 + 2 * y2; }
std::vector<std::string> game_outcome_labels();

using OutcomeDist = Eigen::Vector4d;

/// Two-player binary entry game. Player i's entry payoff is
/// alpha_i(w) + v_i + delta_ij(w) y_j with v_i = beta0_i(w) + beta1_i(w) z_i + e_i.
struct GameStructure {
  std::vector<std::string> w_levels;
  std::vector<Eigen::Vector2d> alpha;
  /// delta[w](i, j) for i != j; the diagonal is unused.
  std::vector<Eigen::Matrix2d> delta;
  std::array<IndexModel, 2> index;
  Concept solution = Concept::Rationalizability;
  double lambda_sel = 0.5;

  void validate() const;
  double delta_sum(std::size_t w) const { return delta[w](0, 1) + delta[w](1, 0); }
};

/// Entry thresholds on v_i implied by the concept (outer and inner per axis).
struct ConceptThresholds {
  Eigen::Vector2d outer;  // a (collusion), a-tilde (rationalizability), c (minimax)
  Eigen::Vector2d inner;  // b (collusion), b-tilde (rationalizability), c (minimax)
};

ConceptThresholds concept_thresholds(const GameStructure& game, std::size_t w);

struct RegionCell {
  enum class Kind { Single, Mixture, Diagonal };
  Kind kind = Kind::Single;
  /// Single and Mixture cells: outcome distribution.
  OutcomeDist dist = OutcomeDist::Zero();
  /// Diagonal cells: `below` holds iff n1 * v1 + n2 * v2 <= offset, else `above`.
  int below = 0;
  int above = 0;
  double n1 = 0.0, n2 = 0.0, offset = 0.0;
};

/// 3 x 3 partition of the plane by the two thresholds on each axis.
/// cells[i][j]: i indexes v1 bands (below low1, between, above high1), j the v2 bands.
struct RegionMap {
  Eigen::Vector2d low;
  Eigen::Vector2d high;
  std::array<std::array<RegionCell, 3>, 3> cells;
  std::optional<std::array<int, 2>> multiplicity;  // indices of the middle band cell with a mixture
};

RegionMap region_map(const GameStructure& game, std::size_t w);

/// The three separation conditions: minimax vs. collusion, minimax vs.
/// rationalizability, rationalizability vs. collusion.
std::array<bool, 3> separation_conditions(const GameStructure& game, std::size_t w);

/// Outcome distribution at (v1, v2) under the game's concept and selection.
OutcomeDist outcome_at(const GameStructure& game, std::size_t w, double v1, double v2);

/// Exact outcome probabilities over grids of z_1 (player 1) and z_2 (player 2)
/// for every w level. Cells are (w, z1 node of player 1, z1 node of player 2).
CCPTable game_ccp_exact(const GameStructure& game, const Grid1D& z_player1, const Grid1D& z_player2);

/// Kernel h(y, v) for an N-player binary game gridded on N axes. Outcome
/// index = sum_i y_i 2^i; values[y] is flattened row-major over the axes.
struct GridKernelND {
  std::vector<Grid1D> axes;
  std::vector<Eigen::VectorXd> values;

  std::size_t players() const { return axes.size(); }
  std::size_t size() const;
  std::size_t flat(const std::vector<int>& idx) const;
};

/// Limit of the kernel as every other player's index goes to -infinity,
/// evaluated at the lowest node of each projected axis (required <= -8).
GridKernelND project_to_pair(const GridKernelND& h, int i, int j);

/// h(y, v1, v2) = outcome_at on a grid, in the N-player layout.
GridKernelND game_kernel_grid(const GameStructure& game, std::size_t w, const Grid1D& v1, const Grid1D& v2);

}  // namespace idlab
