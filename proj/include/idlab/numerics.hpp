#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace idlab {

/// Raised when a computation is mathematically well-posed but fails numerically
/// (non-convergent quadrature, missing crossing, inconsistent surface).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform grid of `n` nodes on [lo, hi].
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  int n = 3;

  Grid1D() = default;
  Grid1D(double lo_, double hi_, int n_);

  double spacing() const { return (hi - lo) / (n - 1); }
  double node(int i) const { return i == n - 1 ? hi : lo + i * spacing(); }
  Eigen::VectorXd nodes() const;
  /// Index of the node nearest to `x` (clamped to the grid).
  int nearest(double x) const;

  bool operator==(const Grid1D&) const = default;
};

/// Function sampled on one or two uniform grids. For two axes, values(i, j)
/// is the sample at (axes[0].node(i), axes[1].node(j)); one axis uses n x 1.
struct GriddedFn {
  std::vector<Grid1D> axes;
  Eigen::MatrixXd values;

  GriddedFn() = default;
  GriddedFn(std::vector<Grid1D> axes_, Eigen::MatrixXd values_);
};

template <typename Scalar>
Scalar gaussian_pdf(Scalar t) {
  if (!std::isfinite(t)) throw std::invalid_argument("gaussian_pdf: non-finite argument");
  using std::exp;
  const Scalar inv_sqrt_2pi = Scalar(0.5) * std::numbers::inv_sqrtpi_v<Scalar> * std::numbers::sqrt2_v<Scalar>;
  return inv_sqrt_2pi * exp(-Scalar(0.5) * t * t);
}

template <typename Scalar>
Scalar gaussian_cdf(Scalar t) {
  if (!std::isfinite(t)) throw std::invalid_argument("gaussian_cdf: non-finite argument");
  using std::erfc;
  return Scalar(0.5) * erfc(-t / std::numbers::sqrt2_v<Scalar>);
}

/// Standard normal c.d.f. that accepts +/-infinity (used for interval masses).
inline double gaussian_cdf_ext(double t) {
  if (std::isnan(t)) throw std::invalid_argument("gaussian_cdf_ext: NaN argument");
  if (t == INFINITY) return 1.0;
  if (t == -INFINITY) return 0.0;
  return 0.5 * std::erfc(-t / std::numbers::sqrt2);
}

/// Nodes and weights with sum_i w_i f(x_i) ~ E[f(e)], e ~ N(0, 1).
template <typename Scalar = double>
struct QuadratureRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
};

/// Gauss-Hermite rule for the standard normal weight (probabilists' Hermite
/// polynomials), built by Golub-Welsch. Exact for polynomials of degree
/// <= 2 * order - 1.
template <typename Scalar = double>
QuadratureRule<Scalar> hermite_quadrature(int order) {
  if (order < 2) throw std::invalid_argument("hermite_quadrature: order must be >= 2");
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat jacobi = Mat::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const Scalar off = std::sqrt(Scalar(k));
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
  QuadratureRule<Scalar> rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  // Symmetrize: the exact rule is symmetric about zero.
  for (int i = 0, j = order - 1; i < j; ++i, --j) {
    const Scalar x = Scalar(0.5) * (rule.nodes(j) - rule.nodes(i));
    const Scalar w = Scalar(0.5) * (rule.weights(i) + rule.weights(j));
    rule.nodes(i) = -x;
    rule.nodes(j) = x;
    rule.weights(i) = rule.weights(j) = w;
  }
  if (order % 2 == 1) rule.nodes(order / 2) = Scalar(0);
  return rule;
}

/// Cached double-precision Hermite rule (thread safe).
const QuadratureRule<double>& hermite_rule(int order);

/// Gauss-Legendre rule on [-1, 1] with unit weight.
template <typename Scalar = double>
QuadratureRule<Scalar> legendre_quadrature(int order) {
  if (order < 1) throw std::invalid_argument("legendre_quadrature: order must be >= 1");
  QuadratureRule<Scalar> rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (order + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (i + Scalar(0.75)) / (order + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1;
      dp = order * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes(i) = -x;
    rule.nodes(order - 1 - i) = x;
    rule.weights(i) = rule.weights(order - 1 - i) = 2 / ((1 - x * x) * dp * dp);
  }
  return rule;
}

const QuadratureRule<double>& legendre_rule(int order);

/// Finite-difference partial derivative of order 1 or 2 along `axis`.
/// Central differences in the interior, second-order one-sided stencils at
/// the two edge nodes. Requires at least 5 nodes on the axis.
/// accuracy = 4 switches interior nodes at distance >= 2 from an edge to the
/// five-point stencils; the remaining nodes keep the second-order formulas.
GriddedFn partial_derivative(const GriddedFn& f, int axis, int order, int accuracy = 2);

// -- regularized linear inversion -------------------------------------------

/// Ridge penalty lambda * ||x||^2.
struct Tikhonov {
  double lambda = 0.0;
};

/// Keep singular triplets with sigma_i / sigma_1 >= threshold, or exactly the
/// leading `rank` triplets when set.
struct TruncatedSvd {
  double threshold = 1e-6;
  std::optional<int> rank;
};

using Regularization = std::variant<Tikhonov, TruncatedSvd>;

/// Parses "tsvd:THRESH", "tsvd-rank:K" or "tikhonov:LAMBDA".
Regularization parse_regularization(const std::string& text);
std::string to_string(const Regularization& reg);

/// SVD-based regularized inverse of a fixed matrix, reusable across
/// right-hand sides.
class RegularizedInverse {
 public:
  RegularizedInverse(const Eigen::MatrixXd& kernel, const Regularization& reg);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  /// The linear map rhs -> solution as a dense (cols x rows) matrix.
  Eigen::MatrixXd as_matrix() const;

  const Eigen::VectorXd& singular_values() const { return sigma_; }
  const Eigen::VectorXd& filter() const { return filter_; }
  /// Number of retained triplets (TSVD) or of nonzero singular values.
  int rank_used() const { return rank_used_; }
  /// Largest singular value that was discarded (0 if none).
  double first_discarded() const;
  const Regularization& regularization() const { return reg_; }

 private:
  Eigen::MatrixXd u_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd sigma_;
  Eigen::VectorXd filter_;  // multiplies U^T b componentwise
  int rank_used_ = 0;
  Regularization reg_;
};

/// argmin ||A x - b||^2 + lambda ||x||^2, or the truncated-SVD solution.
Eigen::VectorXd regularized_solve(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& rhs,
                                  const Regularization& reg);

/// Euclidean projection of `x` onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& x);

}  // namespace idlab
