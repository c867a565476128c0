#pragma once

#include "idlab/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace idlab {

/// Known sign for one w level: either of beta0 or of beta1.
struct SignInfo {
  enum class Of { Beta0, Beta1 };
  Of of = Of::Beta1;
  int sign = 1;

  SignInfo flipped() const { return {of, -sign}; }
};

/// v = z2 * (beta0(w) + beta1(w) * z1 + e), e ~ N(0, 1).
struct IndexModel {
  std::vector<std::string> w_levels;
  std::vector<double> beta0;
  std::vector<double> beta1;
  std::vector<SignInfo> sign_info;

  void validate() const;
  std::size_t w_count() const { return w_levels.size(); }
  std::size_t w_index(const std::string& label) const;
  /// beta0 + beta1 * z1 for level `w`.
  double mean_shift(std::size_t w, double z1) const { return beta0[w] + beta1[w] * z1; }
};

/// Finite mixture for g given one w level. Point-mass components use `atoms`;
/// Gaussian components use `means` and per-coordinate `scales`.
struct GMixture {
  enum class Kind { PointMass, Gaussian };
  Kind kind = Kind::PointMass;
  std::vector<Eigen::VectorXd> atoms;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> scales;
  std::vector<double> probs;

  int dimension() const;
  std::size_t components() const { return probs.size(); }
  void validate() const;
  /// P(g <= x) componentwise.
  double cdf(const Eigen::VectorXd& x) const;
};

/// One mixture per w level (a single entry is shared by all levels).
struct GDistribution {
  std::vector<GMixture> per_w;

  const GMixture& at(std::size_t w) const { return per_w.size() == 1 ? per_w.front() : per_w.at(w); }
};

enum class Family { Binary, Multinomial, Bundles };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Single-agent model. Utilities are u_k = index_sign * a_k * (beta0 + beta1 z1 + e) + g_k
/// for inside alternatives k = 1..K and u_0 = 0, where a_k = z2_k (binary,
/// multinomial) or a_k = sum_j y_j z2_j over the bundle with index k.
/// index_sign = -1 realizes the sign-reflected g of the non-identification
/// example.
struct ModelSpec {
  Family family = Family::Binary;
  int J = 1;
  IndexModel index;
  GDistribution g;
  Grid1D z1_grid;
  std::vector<Eigen::VectorXd> z2_points;
  int index_sign = 1;

  void validate() const;
  /// Number of inside alternatives (dimension of g).
  int inside_count() const;
  /// Coefficients a_k (k = 1..K) multiplying the index at z2 point `z2`.
  Eigen::VectorXd loadings(const Eigen::VectorXd& z2) const;
};

/// Outcome labels: "0", "1", ... for binary and multinomial; bit strings
/// "y1y2...yJ" for bundles, ordered by sum_j y_j 2^(j-1).
std::vector<std::string> outcome_set(const ModelSpec& spec);
std::vector<std::string> bundle_labels(int J);

/// Utility-maximizing outcome index; ties go to the smallest index.
int choice_given_draw(const ModelSpec& spec, std::size_t w, double z1, const Eigen::VectorXd& z2, double e1,
                      const Eigen::VectorXd& g);

/// Gridded conditional choice probabilities. Rows are cells ordered by
/// (w, z2 index, z1 node[, second z1 node]) in row-major order; columns are
/// outcomes. Empty simulated cells hold NaN.
struct CCPTable {
  std::vector<std::string> outcomes;
  std::vector<std::string> w_levels;
  std::vector<Eigen::VectorXd> z2_points;
  std::vector<Grid1D> z1_grids;
  Eigen::MatrixXd values;

  std::size_t cells_per_w() const;
  std::size_t z1_cells() const;
  std::size_t row(std::size_t w, std::size_t z2, std::size_t z1a, std::size_t z1b = 0) const;
  /// mu(y | w, z2, .) over the z1 grid(s): n1 x 1, or n1 x n2 for games.
  Eigen::MatrixXd slice(std::size_t y, std::size_t w, std::size_t z2) const;
  /// Largest |sum_y mu - 1| over non-empty cells.
  double max_row_sum_error() const;
  int outcome_index(const std::string& label) const;
};

struct QuadratureOptions {
  int start_order = 40;
  int max_order = 640;
  double tolerance = 1e-9;
};

/// Exact forward CCPs: Gauss-Hermite over e with order doubling, closed form
/// or Gauss-Legendre over g. Throws NumericalError when the order cap is hit.
CCPTable ccp_exact(const ModelSpec& spec, const QuadratureOptions& quad = {});

/// Choice probabilities given the scalar index value t = beta0 + beta1 z1 + e.
Eigen::VectorXd choice_probabilities_given_index(const ModelSpec& spec, std::size_t w, const Eigen::VectorXd& z2,
                                                 double t);

struct Dataset {
  std::vector<int> y;
  std::vector<int> w;
  std::vector<int> z2;
  std::vector<int> z1;
};

Dataset simulate(const ModelSpec& spec, long n, std::uint64_t seed);

struct EmpiricalCCP {
  CCPTable table;
  std::vector<std::size_t> empty_cells;
};

EmpiricalCCP ccp_empirical(const Dataset& data, const ModelSpec& spec);

}  // namespace idlab
