#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace idlab;
using namespace fixtures;

namespace {

const Grid1D kZ1(-1.0, 1.0, 65);
const Grid1D kZ2(0.5, 1.5, 33);

GriddedFn surface(const Grid1D& z1, const Grid1D& z2, double (*f)(double, double)) {
  Eigen::MatrixXd v(z1.n, z2.n);
  for (int i = 0; i < z1.n; ++i)
    for (int j = 0; j < z2.n; ++j) v(i, j) = f(z1.node(i), z2.node(j));
  return GriddedFn({z1, z2}, v);
}

CCPTable prop2_table(const Grid1D& z1 = kZ1, const Grid1D& z2 = kZ2) {
  return ccp_exact(binary_normal(0.5, 1.0, z1, scalar_points(z2)));
}

CCPTable sign_table(double slope) {
  CCPTable t;
  t.outcomes = {"0", "1", "2"};
  t.w_levels = {"w0"};
  t.z2_points = {vec({1.0, 1.0})};
  t.z1_grids = {Grid1D(-1.0, 1.0, 21)};
  t.values.resize(21, 3);
  for (int i = 0; i < 21; ++i) {
    const double m0 = 0.4 + slope * t.z1_grids[0].node(i);
    t.values.row(i) << m0, 0.5 * (1 - m0), 0.5 * (1 - m0);
  }
  return t;
}

}  // namespace

TEST(BuildEta, ConstantSurface) {
  const EtaSurface s = build_eta(surface(kZ1, kZ2, [](double, double) { return 0.3; }));
  for (int j = 0; j < kZ2.n; ++j) EXPECT_NEAR(s.eta_tilde.values(10, j), 0.3 * kZ2.node(j), 1e-15);
  EXPECT_LT(s.d1.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildEta, DerivativeOfNormalCcp) {
  const CCPTable mu = ccp_exact(binary_normal(0.0, 1.0, kZ1, scalar_points(kZ2)));
  const EtaSurface s = build_eta(mu, "0", "w0");
  ASSERT_NEAR(kZ2.node(16), 1.0, 1e-15);
  EXPECT_NEAR(s.d1.values(32, 16), -gaussian_pdf(0.0) / std::sqrt(2.0), 1e-4);
}

TEST(BuildEta, AffineHasZeroSecondDerivative) {
  const EtaSurface s = build_eta(surface(kZ1, kZ2, [](double z1, double) { return 0.4 + 0.2 * z1; }));
  EXPECT_LT(s.d11.values.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BuildEta, Preconditions) {
  const CCPTable mu = prop2_table(kZ1, Grid1D(0.5, 1.5, 4));
  EXPECT_THROW(build_eta(mu, "0", "w0"), std::invalid_argument);
  CCPTable with_zero = prop2_table(kZ1, Grid1D(0.5, 1.5, 9));
  EXPECT_THROW(build_eta(with_zero, "9", "w0"), std::invalid_argument);
  with_zero.z2_points = scalar_points(Grid1D(-1.0, 1.0, 9));
  EXPECT_THROW(build_eta(with_zero, "0", "w0"), std::invalid_argument);
}

TEST(Degeneracy, AffineIsDegenerate) {
  const EtaSurface s = build_eta(surface(kZ1, kZ2, [](double z1, double z2) { return 0.3 + 0.1 * z2 + 0.2 * z1; }));
  EXPECT_TRUE(check_degeneracy(s).degenerate);
}

TEST(Degeneracy, ExponentialIsDegenerate) {
  const EtaSurface s =
      build_eta(surface(kZ1, kZ2, [](double z1, double z2) { return 0.1 + 0.2 * z2 + 0.3 * std::exp(0.8 * z2 * z1); }));
  EXPECT_TRUE(check_degeneracy(s).degenerate);
}

TEST(Degeneracy, NormalCdfIsNotDegenerate) {
  const EtaSurface s = build_eta(surface(kZ1, kZ2, [](double z1, double) { return gaussian_cdf(-z1 / std::sqrt(2.0)); }));
  const DegeneracyReport r = check_degeneracy(s);
  EXPECT_FALSE(r.degenerate);
  EXPECT_GT(r.statistic, 1e-3);
  EXPECT_GE(r.witness_z1, 0);
}

TEST(IdentifyBeta, RecoversCoefficients) {
  const EtaSurface s = build_eta(prop2_table(), "0", "w0");
  const BetaEstimate b = identify_beta(s, {SignInfo::Of::Beta1, 1});
  EXPECT_NEAR(b.beta1_sq, 1.0, 0.01);
  EXPECT_NEAR(b.ratio, 0.5, 0.01);
  EXPECT_NEAR(b.beta0, 0.5, 0.01);
  EXPECT_NEAR(b.beta1, 1.0, 0.01);
  EXPECT_FALSE(b.misspecified);
  EXPECT_GT(b.cells_used, 100);
}

TEST(IdentifyBeta, SignFromBeta0) {
  const EtaSurface s = build_eta(prop2_table(), "0", "w0");
  const BetaEstimate b = identify_beta(s, {SignInfo::Of::Beta0, 1});
  EXPECT_NEAR(b.beta0, 0.5, 0.01);
  EXPECT_NEAR(b.beta1, 1.0, 0.01);
}

TEST(IdentifyBeta, FlippedSignNegatesPair) {
  const EtaSurface s = build_eta(prop2_table(), "0", "w0");
  const BetaEstimate a = identify_beta(s, {SignInfo::Of::Beta1, 1});
  const BetaEstimate b = identify_beta(s, SignInfo{SignInfo::Of::Beta1, 1}.flipped());
  EXPECT_EQ(b.beta0, -a.beta0);
  EXPECT_EQ(b.beta1, -a.beta1);
}

TEST(IdentifyBeta, OtherOutcomeGivesSameAnswer) {
  const EtaSurface s = build_eta(prop2_table(), "1", "w0");
  const BetaEstimate b = identify_beta(s, {SignInfo::Of::Beta1, 1});
  EXPECT_NEAR(b.beta1_sq, 1.0, 0.01);
  EXPECT_NEAR(b.ratio, 0.5, 0.01);
}

TEST(IdentifyBeta, DegenerateSurfaceThrows) {
  const EtaSurface s = build_eta(surface(kZ1, kZ2, [](double z1, double) { return 0.4 + 0.2 * z1; }));
  EXPECT_THROW(identify_beta(s, {}), NumericalError);
}

TEST(IdentifyBeta, ZeroRatioCannotResolveSignOfBeta0) {
  const EtaSurface s = build_eta(ccp_exact(binary_normal(0.0, 1.0, kZ1, scalar_points(kZ2))), "0", "w0");
  EXPECT_THROW(identify_beta(s, {SignInfo::Of::Beta0, 1}), std::invalid_argument);
  EXPECT_NEAR(identify_beta(s, {SignInfo::Of::Beta1, 1}).beta1, 1.0, 0.01);
}

TEST(IdentityResidual, ShrinksWithRefinement) {
  std::vector<double> res;
  for (int n : {17, 33, 65}) {
    const Grid1D z1(-1.0, 1.0, n), z2(0.5, 1.5, (n + 1) / 2);
    res.push_back(identity_residual(build_eta(prop2_table(z1, z2), "0", "w0"), 0.5, 1.0));
  }
  EXPECT_LT(res[1], res[0] / 3.0);
  EXPECT_LT(res[2], res[1] / 3.0);
  // A wrong candidate leaves a visible residual.
  EXPECT_GT(identity_residual(build_eta(prop2_table(), "0", "w0"), 0.3, 1.2), 100.0 * res[2]);
}

TEST(Beta1SignMultinomial, Slopes) {
  EXPECT_EQ(identify_beta1_sign_multinomial(sign_table(-0.2), "w0").sign, std::optional<int>(1));
  EXPECT_EQ(identify_beta1_sign_multinomial(sign_table(0.2), "w0").sign, std::optional<int>(-1));
  EXPECT_FALSE(identify_beta1_sign_multinomial(sign_table(0.0), "w0").sign.has_value());
}

TEST(Beta1SignMultinomial, FromForwardModel) {
  ModelSpec m;
  m.family = Family::Multinomial;
  m.J = 2;
  m.index = index_model(0.0, -0.8);
  m.g.per_w = {gaussian_g({vec({0.0, 0.0})}, {vec({1.0, 1.0})}, {1.0})};
  m.z1_grid = Grid1D(-1.0, 1.0, 21);
  m.z2_points = {vec({1.0, 0.5}), vec({0.7, 0.7})};
  const SignVerdict v = identify_beta1_sign_multinomial(ccp_exact(m), "w0");
  EXPECT_EQ(v.sign, std::optional<int>(-1));
  EXPECT_EQ(v.z2_index, 1);
}
