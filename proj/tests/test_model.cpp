#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace idlab;
using namespace fixtures;

namespace {

ModelSpec multinomial2(const GMixture& g, std::vector<Eigen::VectorXd> z2 = {vec({1.0, 1.0})}) {
  ModelSpec m;
  m.family = Family::Multinomial;
  m.J = 2;
  m.index = index_model(0.0, 1.0);
  m.g.per_w = {g};
  m.z1_grid = Grid1D(-1.0, 1.0, 9);
  m.z2_points = std::move(z2);
  return m;
}

}  // namespace

TEST(OutcomeSet, Families) {
  ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1, 1, 5), {vec({1.0})});
  EXPECT_EQ(outcome_set(m), (std::vector<std::string>{"0", "1"}));
  m = multinomial2(gaussian_g({vec({0, 0})}, {vec({1, 1})}, {1.0}));
  EXPECT_EQ(outcome_set(m), (std::vector<std::string>{"0", "1", "2"}));
  EXPECT_EQ(bundle_labels(2), (std::vector<std::string>{"00", "10", "01", "11"}));
}

TEST(ChoiceGivenDraw, BinaryPositiveUtilityEnters) {
  const ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1, 1, 5), {vec({1.0})});
  EXPECT_EQ(choice_given_draw(m, 0, 0.5, vec({1.0}), 0.2, vec({0.0})), 1);
  EXPECT_EQ(choice_given_draw(m, 0, 0.5, vec({1.0}), -0.9, vec({0.0})), 0);
}

TEST(ChoiceGivenDraw, MultinomialOutsideOptionMaximal) {
  const ModelSpec m = multinomial2(gaussian_g({vec({0, 0})}, {vec({1, 1})}, {1.0}));
  EXPECT_EQ(choice_given_draw(m, 0, 0.0, vec({1.0, 1.0}), 0.0, vec({-1.0, -2.0})), 0);
}

TEST(ChoiceGivenDraw, BundleTieGoesToSmallestIndex) {
  ModelSpec m = multinomial2(gaussian_g({vec({0, 0, 0})}, {vec({1, 1, 1})}, {1.0}));
  m.family = Family::Bundles;
  // index value 2 at z1 = 2, e = 0; bundles 10 and 01 tie at 2, 11 gets 4 - 5.
  EXPECT_EQ(choice_given_draw(m, 0, 2.0, vec({1.0, 1.0}), 0.0, vec({0.0, 0.0, -5.0})), 1);
}

TEST(CcpExact, BinaryNormalMatchesAnalyticConvolution) {
  const ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 65), {vec({1.0})});
  const CCPTable t = ccp_exact(m);
  EXPECT_NEAR(t.values(t.row(0, 0, 32), 0), 0.5, 1e-12);
  for (int i = 0; i < 65; ++i)
    EXPECT_NEAR(t.values(t.row(0, 0, i), 0), gaussian_cdf(-m.z1_grid.node(i) / std::sqrt(2.0)), 1e-9);
  EXPECT_LT(t.max_row_sum_error(), 1e-12);
}

TEST(CcpExact, DominatingAtomForcesInsideGood) {
  ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 9), {vec({1.0})});
  m.g.per_w = {atoms_g({vec({40.0})}, {1.0})};
  const CCPTable t = ccp_exact(m);
  EXPECT_LT(t.values.col(0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CcpExact, MultinomialRowsSumToOne) {
  const CCPTable a = ccp_exact(multinomial2(atoms_g({vec({-10.0, -10.0})}, {1.0})));
  EXPECT_LT(a.max_row_sum_error(), 1e-9);
  const CCPTable b = ccp_exact(
      multinomial2(gaussian_g({vec({-0.5, 0.3}), vec({0.6, -0.4})}, {vec({0.6, 0.5}), vec({0.5, 0.7})}, {0.4, 0.6}),
                   {vec({1.0, 1.0}), vec({1.0, 0.5})}));
  EXPECT_LT(b.max_row_sum_error(), 1e-9);
}

TEST(CcpExact, PointMassIsGaussianLimit) {
  const CCPTable pm = ccp_exact(multinomial2(atoms_g({vec({0.3, -0.2})}, {1.0})));
  QuadratureOptions quad;
  quad.max_order = 1280;
  std::vector<double> gap;
  for (double s : {0.8, 0.4, 0.2}) {
    const CCPTable ga = ccp_exact(multinomial2(gaussian_g({vec({0.3, -0.2})}, {vec({s, s})}, {1.0})), quad);
    gap.push_back((pm.values - ga.values).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(gap[1], gap[0]);
  EXPECT_LT(gap[2], gap[1]);
  EXPECT_LT(gap[2], 0.05);
}

TEST(CcpExact, UnresolvedQuadratureThrows) {
  const ModelSpec sharp = multinomial2(gaussian_g({vec({0.3, -0.2})}, {vec({1e-3, 1e-3})}, {1.0}));
  EXPECT_THROW(ccp_exact(sharp), NumericalError);
}

TEST(ModelSpec, RejectsZeroZ2ForBinary) {
  ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 9), {vec({0.0})});
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(ModelSpec, RejectsBadMixture) {
  ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 9), {vec({1.0})});
  m.g.per_w = {gaussian_g({vec({0.0})}, {vec({1.0})}, {0.7})};
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(ModelSpec, IndexSignReflection) {
  // (beta0, beta1, g) and (-beta0, -beta1, reflected g) generate the same CCPs.
  ModelSpec a = binary_normal(0.5, 1.0, Grid1D(-1.0, 1.0, 17), {vec({0.5}), vec({1.5})});
  ModelSpec b = a;
  b.index.beta0 = {-0.5};
  b.index.beta1 = {-1.0};
  b.index_sign = -1;
  EXPECT_LT((ccp_exact(a).values - ccp_exact(b).values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simulate, RejectsEmptySample) {
  const ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 3), {vec({1.0})});
  EXPECT_THROW(simulate(m, 0, 1), std::invalid_argument);
}

TEST(Simulate, DeterministicForFixedSeed) {
  const ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 3), {vec({1.0})});
  const Dataset a = simulate(m, 5000, 42), b = simulate(m, 5000, 42), c = simulate(m, 5000, 43);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.z1, b.z1);
  EXPECT_NE(a.y, c.y);
}

TEST(Simulate, EmpiricalCcpAtZeroIsHalf) {
  const ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 3), {vec({1.0})});
  const EmpiricalCCP e = ccp_empirical(simulate(m, 1000000, 2024), m);
  EXPECT_TRUE(e.empty_cells.empty());
  EXPECT_NEAR(e.table.values(e.table.row(0, 0, 1), 0), 0.5, 0.002);
}

TEST(Simulate, EmpiricalConvergesAtMonteCarloRate) {
  const ModelSpec m = binary_normal(0.3, 1.0, Grid1D(-1.0, 1.0, 5), {vec({0.5}), vec({1.5})});
  const CCPTable exact = ccp_exact(m);
  std::vector<double> err;
  for (long n : {4000L, 64000L, 1024000L}) {
    const EmpiricalCCP e = ccp_empirical(simulate(m, n, 99), m);
    err.push_back(std::sqrt((e.table.values - exact.values).array().square().mean()));
  }
  // 16x more data: error should shrink by about 4.
  EXPECT_LT(err[1], err[0] / 2.0);
  EXPECT_LT(err[2], err[1] / 2.0);
  EXPECT_GT(err[2], err[1] / 8.0);
}

TEST(Simulate, EmptyCellsAreNaN) {
  const ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 65), {vec({1.0})});
  const EmpiricalCCP e = ccp_empirical(simulate(m, 20, 5), m);
  EXPECT_FALSE(e.empty_cells.empty());
  EXPECT_TRUE(std::isnan(e.table.values(static_cast<long>(e.empty_cells.front()), 0)));
}

TEST(CcpTable, LayoutAndSlices) {
  const ModelSpec m = binary_normal(0.0, 1.0, Grid1D(-1.0, 1.0, 5), {vec({0.5}), vec({1.0}), vec({1.5})});
  const CCPTable t = ccp_exact(m);
  EXPECT_EQ(t.values.rows(), 15);
  EXPECT_EQ(t.row(0, 2, 4), 14u);
  EXPECT_EQ(t.slice(1, 0, 1).rows(), 5);
  EXPECT_EQ(t.outcome_index("1"), 1);
  EXPECT_THROW(t.outcome_index("7"), std::invalid_argument);
}
