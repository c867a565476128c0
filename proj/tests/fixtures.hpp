#pragma once

#include "idlab/betaid.hpp"
#include "idlab/deconv.hpp"
#include "idlab/games.hpp"
#include "idlab/model.hpp"
#include "idlab/recover.hpp"

namespace fixtures {

using namespace idlab;

inline IndexModel index_model(double beta0, double beta1, SignInfo sign = {}) {
  IndexModel m;
  m.w_levels = {"w0"};
  m.beta0 = {beta0};
  m.beta1 = {beta1};
  m.sign_info = {sign};
  return m;
}

inline GMixture gaussian_g(const std::vector<Eigen::VectorXd>& means, const std::vector<Eigen::VectorXd>& scales,
                           std::vector<double> probs) {
  GMixture g;
  g.kind = GMixture::Kind::Gaussian;
  g.means = means;
  g.scales = scales;
  g.probs = std::move(probs);
  return g;
}

inline GMixture atoms_g(const std::vector<Eigen::VectorXd>& atoms, std::vector<double> probs) {
  GMixture g;
  g.kind = GMixture::Kind::PointMass;
  g.atoms = atoms;
  g.probs = std::move(probs);
  return g;
}

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline std::vector<Eigen::VectorXd> scalar_points(const Grid1D& g) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < g.n; ++i) out.push_back(vec({g.node(i)}));
  return out;
}

/// Binary model with g ~ N(0, 1).
inline ModelSpec binary_normal(double beta0, double beta1, const Grid1D& z1, const std::vector<Eigen::VectorXd>& z2,
                               SignInfo sign = {}) {
  ModelSpec m;
  m.family = Family::Binary;
  m.J = 1;
  m.index = index_model(beta0, beta1, sign);
  m.g.per_w = {gaussian_g({vec({0.0})}, {vec({1.0})}, {1.0})};
  m.z1_grid = z1;
  m.z2_points = z2;
  return m;
}

/// Two-player game with a single w level and index v_i = z_i + e_i.
inline GameStructure game(Eigen::Vector2d alpha, double d12, double d21, Concept c, double lambda = 0.5) {
  GameStructure g;
  g.w_levels = {"w0"};
  g.alpha = {alpha};
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 1) = d12;
  d(1, 0) = d21;
  g.delta = {d};
  g.index = {index_model(0.0, 1.0), index_model(0.0, 1.0)};
  g.solution = c;
  g.lambda_sel = lambda;
  return g;
}

}  // namespace fixtures
