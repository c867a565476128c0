#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace idlab;
using namespace fixtures;

namespace {

ChoiceKernel one_axis_kernel(const Grid1D& g, const Eigen::VectorXd& h0) {
  ChoiceKernel h;
  h.outcomes = {"0"};
  h.w = "w0";
  h.z2_index = 0;
  h.v_axes = {g};
  h.support = {{g.lo, g.hi}};
  h.values = {h0};
  return h;
}

ChoiceKernel game_kernel(const GameStructure& game, const Grid1D& v, std::vector<std::string> outcomes = {"00", "11"}) {
  const GridKernelND nd = game_kernel_grid(game, 0, v, v);
  const auto labels = game_outcome_labels();
  ChoiceKernel h;
  h.outcomes = outcomes;
  h.w = "w0";
  h.v_axes = {v, v};
  h.support = {{v.lo, v.hi}, {v.lo, v.hi}};
  for (const auto& o : outcomes) {
    const int y = static_cast<int>(std::find(labels.begin(), labels.end(), o) - labels.begin());
    h.values.push_back(Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(nd.values[y].data(), v.n, v.n));
  }
  return h;
}

ModelSpec mixture_j2(std::vector<Eigen::VectorXd> z2) {
  ModelSpec m;
  m.family = Family::Multinomial;
  m.J = 2;
  m.index = index_model(0.0, 1.0);
  m.g.per_w = {gaussian_g({vec({-0.5, 0.3}), vec({0.6, -0.4})}, {vec({0.8, 0.8}), vec({0.8, 0.8})}, {0.5, 0.5})};
  m.z1_grid = Grid1D(-1.0, 1.0, 65);
  m.z2_points = std::move(z2);
  return m;
}

RaySetCDF rays_for(const ModelSpec& m) {
  const auto rec = recover_h(ccp_exact(m), m.index, KernelLayout::PerPoint);
  std::vector<ChoiceKernel> ks;
  std::vector<Eigen::VectorXd> loads;
  for (const auto& r : rec) {
    ks.push_back(r.kernel);
    loads.push_back(m.loadings(m.z2_points[static_cast<std::size_t>(r.kernel.z2_index)]));
  }
  return recover_fg(ks, loads, "0");
}

}  // namespace

TEST(RecoverFg, TwoAtomMixturePlateaus) {
  const Grid1D g(-3.0, 3.0, 61);
  const GMixture mix = atoms_g({vec({-1.0}), vec({1.0})}, {0.5, 0.5});
  Eigen::VectorXd h0(g.n);
  for (int i = 0; i < g.n; ++i) h0(i) = mix.cdf(vec({-g.node(i)}));
  const RaySetCDF r = recover_fg({one_axis_kernel(g, h0)}, {vec({1.0})}, "0");
  ASSERT_EQ(r.rays.size(), 1u);
  const Ray& ray = r.rays[0];
  EXPECT_EQ(ray.orientation, 1);
  EXPECT_EQ(ray.max_drop, 0.0);
  for (long i = 0; i < ray.lambda.size(); ++i) {
    const double l = ray.lambda(i);
    const double expect = l < -1.0 ? 0.0 : (l < 1.0 ? 0.5 : 1.0);
    EXPECT_NEAR(ray.cdf(i), expect, 1e-12) << "lambda " << l;
  }
  for (long i = 1; i < ray.lambda.size(); ++i) EXPECT_GT(ray.lambda(i), ray.lambda(i - 1));
}

TEST(RecoverFg, ConstantOneKernel) {
  const Grid1D g(-2.0, 2.0, 21);
  const RaySetCDF r = recover_fg({one_axis_kernel(g, Eigen::VectorXd::Ones(g.n))}, {vec({0.5, 1.5})}, "0");
  EXPECT_EQ(r.rays[0].cdf, Eigen::VectorXd::Ones(g.n));
  EXPECT_NEAR(r.rays[0].direction.norm(), 1.0, 1e-15);
}

TEST(RecoverFg, RearrangementRepairsSmallDips) {
  const Grid1D g(-2.0, 2.0, 5);
  const Eigen::VectorXd h0 = (Eigen::VectorXd(5) << 1.0, 0.7, 0.72, 0.3, 0.0).finished();
  const RaySetCDF r = recover_fg({one_axis_kernel(g, h0)}, {vec({1.0})}, "0");
  EXPECT_NEAR(r.max_drop, 0.02, 1e-12);
  EXPECT_FALSE(r.violation);
  for (long i = 1; i < 5; ++i) EXPECT_GE(r.rays[0].cdf(i), r.rays[0].cdf(i - 1));
  EXPECT_NEAR(r.max_perturbation, 0.02, 1e-12);
  const Eigen::VectorXd bad = (Eigen::VectorXd(5) << 1.0, 0.5, 0.8, 0.3, 0.0).finished();
  EXPECT_TRUE(recover_fg({one_axis_kernel(g, bad)}, {vec({1.0})}, "0").violation);
}

TEST(RecoverFg, MixedSignLoadingsAreNotRearranged) {
  const Grid1D g(-2.0, 2.0, 5);
  const Eigen::VectorXd h0 = (Eigen::VectorXd(5) << 0.2, 0.7, 0.1, 0.3, 0.0).finished();
  const RaySetCDF r = recover_fg({one_axis_kernel(g, h0)}, {vec({1.0, -1.0})}, "0");
  EXPECT_EQ(r.rays[0].orientation, 0);
  EXPECT_EQ(r.rays[0].cdf, r.rays[0].raw);
  EXPECT_FALSE(r.violation);
}

TEST(RecoverFg, BivariateMixtureOnTwoRays) {
  const ModelSpec m = mixture_j2({vec({1.0, 1.0}), vec({1.0, 2.0})});
  const RaySetCDF r = rays_for(m);
  ASSERT_EQ(r.rays.size(), 2u);
  EXPECT_FALSE(r.violation);
  const GMixture& g = m.g.at(0);
  for (const Ray& ray : r.rays)
    for (long i = 0; i < ray.lambda.size(); ++i)
      EXPECT_NEAR(ray.cdf(i), g.cdf(ray.lambda(i) * ray.direction), 0.03);
}

TEST(RecoverFg, InvariantToRescalingZ2) {
  // The equal-coordinate point is required by the model; compare the second ray.
  // Both loadings stay inside the range the z1 grid resolves; larger ones coarsen the lambda spacing.
  const RaySetCDF a = rays_for(mixture_j2({vec({1.0, 1.0}), vec({0.5, 1.0})}));
  const RaySetCDF b = rays_for(mixture_j2({vec({1.0, 1.0}), vec({1.0, 2.0})}));
  ASSERT_EQ(a.rays.size(), 2u);
  ASSERT_EQ(b.rays.size(), 2u);
  EXPECT_LT((a.rays[1].direction - b.rays[1].direction).norm(), 1e-15);
  // Interpolate b at a's lambda points that lie inside b's range.
  const Ray& ra = a.rays[1];
  const Ray& rb = b.rays[1];
  int compared = 0;
  for (long i = 0; i < ra.lambda.size(); ++i) {
    const double l = ra.lambda(i);
    for (long k = 0; k + 1 < rb.lambda.size(); ++k)
      if (rb.lambda(k) <= l && l <= rb.lambda(k + 1)) {
        const double t = (l - rb.lambda(k)) / (rb.lambda(k + 1) - rb.lambda(k));
        EXPECT_NEAR(ra.cdf(i), (1 - t) * rb.cdf(k) + t * rb.cdf(k + 1), 0.03);
        ++compared;
        break;
      }
  }
  EXPECT_GT(compared, 20);
}

TEST(RecoverFg, InputChecks) {
  const Grid1D g(-2.0, 2.0, 5);
  const ChoiceKernel h = one_axis_kernel(g, Eigen::VectorXd::Ones(5));
  EXPECT_THROW(recover_fg({h}, {}, "0"), std::invalid_argument);
  EXPECT_THROW(recover_fg({h}, {vec({0.0})}, "0"), std::invalid_argument);
  EXPECT_THROW(recover_fg({h}, {vec({1.0})}, "3"), std::invalid_argument);
}

TEST(DetectThresholds, RationalizabilityRegions) {
  const Grid1D v(-3.0, 3.0, 121);
  const ThresholdEstimate t = detect_thresholds(game_kernel(game({0.5, -0.25}, -1.0, -0.5, Concept::Rationalizability), v));
  EXPECT_NEAR(t.outer(0), -0.5, v.spacing());
  EXPECT_NEAR(t.outer(1), 0.25, v.spacing());
  EXPECT_NEAR(t.inner(0), 0.5, v.spacing());
  EXPECT_NEAR(t.inner(1), 0.75, v.spacing());
  EXPECT_DOUBLE_EQ(t.spacing, v.spacing());
}

TEST(DetectThresholds, MinimaxThresholdsCoincide) {
  const Grid1D v(-3.0, 3.0, 121);
  const ThresholdEstimate t = detect_thresholds(game_kernel(game({0.5, -0.25}, -1.0, -0.5, Concept::Minimax), v));
  EXPECT_NEAR(t.outer(0), t.inner(0), v.spacing());
  EXPECT_NEAR(t.outer(1), t.inner(1), v.spacing());
  EXPECT_NEAR(t.outer(0), 0.5, v.spacing());
  EXPECT_NEAR(t.outer(1), 0.75, v.spacing());
}

TEST(DetectThresholds, FlatKernelHasNoCrossing) {
  ChoiceKernel h = game_kernel(game({0.5, -0.25}, -1.0, -0.5, Concept::Minimax), Grid1D(-3.0, 3.0, 31));
  for (auto& x : h.values) x.setConstant(0.5);
  EXPECT_THROW(detect_thresholds(h), NumericalError);
}

TEST(DetectThresholds, UnsupportedPair) {
  ChoiceKernel h = game_kernel(game({0.5, -0.25}, -1.0, -0.5, Concept::Minimax), Grid1D(-3.0, 3.0, 31), {"01", "11"});
  EXPECT_THROW(detect_thresholds(h), std::invalid_argument);
}

namespace {

ThresholdEstimate thresholds(Eigen::Vector2d outer, Eigen::Vector2d inner, double spacing = 0.05) {
  ThresholdEstimate t;
  t.outer = outer;
  t.inner = inner;
  t.spacing = spacing;
  return t;
}

}  // namespace

TEST(ClassifyConcept, ByWidths) {
  EXPECT_EQ(classify_concept(thresholds({-0.5, 0.25}, {0.5, 0.75})).solution, Concept::Rationalizability);
  EXPECT_EQ(classify_concept(thresholds({-0.5, 0.25}, {1.0, 1.75})).solution, Concept::Collusion);
  EXPECT_EQ(classify_concept(thresholds({0.5, 0.75}, {0.5, 0.75})).solution, Concept::Minimax);
  EXPECT_DOUBLE_EQ(classify_concept(thresholds({0.5, 0.75}, {0.5, 0.75})).tolerance, 0.1);
}

TEST(ClassifyConcept, ZeroZeroOneZeroGivesCandidates) {
  ThresholdEstimate t = thresholds({-0.5, 0.25}, {NAN, 0.75});
  t.pair = OutcomePair::ZeroZeroOneZero;
  const ConceptReport r = classify_concept(t);
  EXPECT_FALSE(r.solution.has_value());
  EXPECT_EQ(r.candidates.size(), 2u);
}

TEST(RecoverPayoffs, Rationalizability) {
  const PayoffEstimate p = recover_payoffs(Concept::Rationalizability, thresholds({-0.5, 0.25}, {0.5, 0.75}), 0.1);
  EXPECT_NEAR((*p.alpha)(0), 0.5, 1e-15);
  EXPECT_NEAR((*p.alpha)(1), -0.25, 1e-15);
  EXPECT_NEAR((*p.delta)(0), -1.0, 1e-15);
  EXPECT_NEAR((*p.delta)(1), -0.5, 1e-15);
}

TEST(RecoverPayoffs, Collusion) {
  const PayoffEstimate p = recover_payoffs(Concept::Collusion, thresholds({-0.5, 0.25}, {1.0, 1.75}), 0.1);
  EXPECT_NEAR((*p.alpha)(0), 0.5, 1e-15);
  EXPECT_NEAR(*p.delta_sum, -1.5, 1e-15);
  EXPECT_FALSE(p.delta.has_value());
  EXPECT_THROW(recover_payoffs(Concept::Collusion, thresholds({-0.5, 0.25}, {1.0, 2.75}), 0.1), NumericalError);
}

TEST(RecoverPayoffs, MinimaxOnlyComposite) {
  const PayoffEstimate p = recover_payoffs(Concept::Minimax, thresholds({0.5, 0.75}, {0.5, 0.75}), 0.1);
  EXPECT_NEAR((*p.composite)(0), -0.5, 1e-15);
  EXPECT_NEAR((*p.composite)(1), -0.75, 1e-15);
  EXPECT_FALSE(p.alpha.has_value());
  EXPECT_FALSE(p.delta.has_value());
}

TEST(GameRoundTrip, ExampleThroughDeconvolution) {
  const Grid1D z(-2.5, 2.5, 41);
  const GameStructure g = game({0.5, -0.25}, -1.0, -0.5, Concept::Rationalizability, 0.3);
  DeconvOptions opt;
  opt.overshoot_tolerance = 0.3;
  const auto rec = recover_h_game(game_ccp_exact(g, z, z), g.index, opt);
  ASSERT_EQ(rec.size(), 1u);
  EXPECT_FALSE(rec[0].diagnostics.failed());
  const ConceptReport r = classify_concept(detect_thresholds(rec[0].kernel));
  ASSERT_TRUE(r.solution.has_value());
  EXPECT_EQ(*r.solution, Concept::Rationalizability);
  const double s = r.thresholds.spacing;
  EXPECT_NEAR((*r.payoffs.alpha)(0), 0.5, 2 * s);
  EXPECT_NEAR((*r.payoffs.alpha)(1), -0.25, 2 * s);
  EXPECT_NEAR((*r.payoffs.delta)(0), -1.0, 2 * s);
  EXPECT_NEAR((*r.payoffs.delta)(1), -0.5, 2 * s);
}
