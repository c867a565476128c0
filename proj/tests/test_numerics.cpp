#include "idlab/numerics.hpp"
#include "idlab/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>

using namespace idlab;

TEST(Gaussian, PdfAndCdfReferenceValues) {
  EXPECT_NEAR(gaussian_pdf(0.0), 0.3989422804, 1e-10);
  EXPECT_DOUBLE_EQ(gaussian_cdf(0.0), 0.5);
  EXPECT_NEAR(gaussian_cdf(1.96), 0.9750021048517795, 1e-12);
  EXPECT_NEAR(gaussian_cdf(-1.96) + gaussian_cdf(1.96), 1.0, 1e-15);
}

TEST(Gaussian, RejectsNonFiniteArguments) {
  EXPECT_THROW(gaussian_pdf(NAN), std::invalid_argument);
  EXPECT_THROW(gaussian_cdf(INFINITY), std::invalid_argument);
  EXPECT_EQ(gaussian_cdf_ext(-INFINITY), 0.0);
  EXPECT_EQ(gaussian_cdf_ext(INFINITY), 1.0);
}

TEST(Gaussian, TemplatedOnScalar) {
  EXPECT_NEAR(static_cast<double>(gaussian_cdf(1.0L)), gaussian_cdf(1.0), 1e-15);
  EXPECT_NEAR(gaussian_pdf(0.5f), 0.35206533f, 1e-6f);
}

double expect(const QuadratureRule<double>& r, double (*f)(double)) {
  double s = 0.0;
  for (long i = 0; i < r.nodes.size(); ++i) s += r.weights(i) * f(r.nodes(i));
  return s;
}

TEST(Hermite, MomentsOfStandardNormal) {
  EXPECT_NEAR(expect(hermite_quadrature(2), [](double e) { return e * e; }), 1.0, 1e-14);
  EXPECT_NEAR(expect(hermite_quadrature(10), [](double e) { return e * e * e * e; }), 3.0, 1e-12);
  EXPECT_NEAR(expect(hermite_quadrature(20), [](double e) { return gaussian_cdf(e); }), 0.5, 1e-14);
  EXPECT_NEAR(hermite_rule(40).weights.sum(), 1.0, 1e-14);
}

TEST(Hermite, SmoothExpectationConverges) {
  // E[Phi(a + e)] = Phi(a / sqrt(2)).
  const auto& r = hermite_rule(40);
  double s = 0.0;
  for (long i = 0; i < r.nodes.size(); ++i) s += r.weights(i) * gaussian_cdf(0.7 + r.nodes(i));
  EXPECT_NEAR(s, gaussian_cdf(0.7 / std::sqrt(2.0)), 1e-12);
}

TEST(Hermite, RejectsTinyOrder) { EXPECT_THROW(hermite_quadrature(1), std::invalid_argument); }

TEST(Legendre, IntegratesPolynomialsExactly) {
  const auto& r = legendre_rule(16);
  double s = 0.0;
  for (long i = 0; i < r.nodes.size(); ++i) s += r.weights(i) * std::pow(r.nodes(i), 30);
  EXPECT_NEAR(s, 2.0 / 31.0, 1e-14);
  EXPECT_NEAR(r.weights.sum(), 2.0, 1e-14);
}

TEST(Grid, NodesAndNearest) {
  const Grid1D g(-1.0, 1.0, 5);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(g.node(4), 1.0);
  EXPECT_EQ(g.nearest(0.3), 3);
  EXPECT_EQ(g.nearest(-7.0), 0);
  EXPECT_THROW(Grid1D(1.0, 0.0, 5), std::invalid_argument);
  EXPECT_THROW(Grid1D(0.0, 1.0, 1), std::invalid_argument);
}

GriddedFn sample(const Grid1D& g, double (*f)(double)) {
  Eigen::VectorXd v(g.n);
  for (int i = 0; i < g.n; ++i) v(i) = f(g.node(i));
  return GriddedFn({g}, v);
}

TEST(PartialDerivative, Quadratic) {
  const Grid1D g(-1.0, 1.0, 21);
  const GriddedFn f = sample(g, [](double z) { return z * z; });
  const GriddedFn d1 = partial_derivative(f, 0, 1);
  const GriddedFn d2 = partial_derivative(f, 0, 2);
  EXPECT_NEAR(d1.values(10, 0), 0.0, 1e-12);
  for (int i = 0; i < g.n; ++i) EXPECT_NEAR(d2.values(i, 0), 2.0, 1e-8);
}

TEST(PartialDerivative, SineWithinSpacingSquared) {
  const Grid1D g(0.0, 0.6, 13);  // node 6 is 0.3
  const double h = g.spacing();
  const GriddedFn f = sample(g, [](double z) { return std::sin(z); });
  EXPECT_NEAR(partial_derivative(f, 0, 1).values(6, 0), std::cos(0.3), h * h);
  EXPECT_NEAR(partial_derivative(f, 0, 1, 4).values(6, 0), std::cos(0.3), h * h * h * h);
}

TEST(PartialDerivative, SecondAxisOfSurface) {
  const Grid1D a(-1.0, 1.0, 9), b(0.0, 2.0, 11);
  Eigen::MatrixXd v(a.n, b.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < b.n; ++j) v(i, j) = a.node(i) * b.node(j) * b.node(j);
  const GriddedFn d = partial_derivative(GriddedFn({a, b}, v), 1, 1);
  for (int i = 0; i < a.n; ++i)
    for (int j = 1; j + 1 < b.n; ++j) EXPECT_NEAR(d.values(i, j), 2.0 * a.node(i) * b.node(j), 1e-12);
}

TEST(PartialDerivative, NeedsFiveNodes) {
  const Grid1D g(0.0, 1.0, 4);
  EXPECT_THROW(partial_derivative(GriddedFn({g}, Eigen::VectorXd::Zero(4)), 0, 1), std::invalid_argument);
}

TEST(RegularizedInverse, IdentityWithZeroRidge) {
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(6, -1.0, 2.0);
  const RegularizedInverse inv(Eigen::MatrixXd::Identity(6, 6), Tikhonov{0.0});
  EXPECT_LT((inv.solve(b) - b).norm(), 1e-14);
}

TEST(RegularizedInverse, RidgeDampsSmallDirection) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 1e-8;
  const Eigen::Vector2d b(1.0, 1e-8);
  const double lambda = 1e-6;
  const Eigen::VectorXd x = RegularizedInverse(a, Tikhonov{lambda}).solve(Eigen::VectorXd(b));
  EXPECT_NEAR(x(0), 1.0 / (1.0 + lambda), 1e-12);
  EXPECT_NEAR(x(1), 1e-16 / (1e-16 + lambda), 1e-12);
  EXPECT_LT(x(1), 1e-8);
}

TEST(RegularizedInverse, FullRankTruncationIsTheInverse) {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const Eigen::Vector3d b(1.0, -2.0, 0.5);
  const RegularizedInverse inv(a, TruncatedSvd{0.0, 3});
  EXPECT_LT((inv.solve(Eigen::VectorXd(b)) - a.inverse() * b).norm(), 1e-10);
  EXPECT_EQ(inv.rank_used(), 3);
  EXPECT_EQ(inv.first_discarded(), 0.0);
}

TEST(RegularizedInverse, ThresholdDropsSmallTriplets) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a.diagonal() << 1.0, 1e-3, 1e-9;
  const RegularizedInverse inv(a, TruncatedSvd{1e-6});
  EXPECT_EQ(inv.rank_used(), 2);
  EXPECT_NEAR(inv.first_discarded(), 1e-9, 1e-20);
  EXPECT_EQ(inv.as_matrix().rows(), 3);
}

TEST(Regularization, ParseAndPrint) {
  EXPECT_NEAR(std::get<TruncatedSvd>(parse_regularization("tsvd:1e-4")).threshold, 1e-4, 0.0);
  EXPECT_EQ(*std::get<TruncatedSvd>(parse_regularization("tsvd-rank:12")).rank, 12);
  EXPECT_NEAR(std::get<Tikhonov>(parse_regularization("tikhonov:0.01")).lambda, 0.01, 0.0);
  EXPECT_EQ(parse_regularization(to_string(parse_regularization("tikhonov:0.5"))).index(), 0u);
  EXPECT_THROW(parse_regularization("ridge:1"), std::invalid_argument);
  EXPECT_THROW(parse_regularization("tsvd:-1"), std::invalid_argument);
  EXPECT_THROW(parse_regularization("tsvd:abc"), std::invalid_argument);
}

TEST(Simplex, Projection) {
  const Eigen::VectorXd p = project_to_simplex(Eigen::Vector3d(0.8, 0.5, -0.1));
  EXPECT_NEAR(p.sum(), 1.0, 1e-14);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_NEAR(p(0), 0.65, 1e-14);
  const Eigen::VectorXd q = project_to_simplex(Eigen::Vector3d(0.2, 0.3, 0.5));
  EXPECT_LT((q - Eigen::Vector3d(0.2, 0.3, 0.5)).norm(), 1e-15);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("x");
               }),
               std::runtime_error);
}
