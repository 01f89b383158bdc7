#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "adacube/gp.hpp"

using namespace adacube;

namespace {

ProductKernelSpec spec2d() {
  ProductKernelSpec s;
  s.c = 0.4;
  s.sigma = 1.3;
  s.fields = {LengthscaleField(FieldKind::PiecewiseLinear, LengthscaleField::uniform_knots(4), {-1.5, -2.0, -1.0, -1.7}),
              LengthscaleField(FieldKind::PiecewiseConstant, {0.0, 0.3, 1.0}, {-1.0, -0.5})};
  return s;
}

Dataset make_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  Dataset D;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng);
    D.append({a, b}, std::sin(5 * a) + b * b);
  }
  return D;
}

}  // namespace

TEST(GP, MatchesDenseInverseOracle) {
  const ProductKernelSpec s = spec2d();
  const Dataset D = make_data(12, 1);
  const ConditionedGP gp = condition(s, D, 0.0);
  const Eigen::MatrixXd K = gram_matrix(s, D.X, 0.0);
  const Eigen::MatrixXd Ki = K.inverse();
  Eigen::VectorXd r(12);
  for (int i = 0; i < 12; ++i) r(i) = D.y[i] - s.c;
  const Point x{0.33, 0.71}, y{0.9, 0.05};
  const Eigen::VectorXd kx = cross_covariance(s, D.X, x), ky = cross_covariance(s, D.X, y);
  EXPECT_NEAR(gp.mean(x), s.c + kx.dot(Ki * r), 1e-8);
  EXPECT_NEAR(gp.cov(x, y), product_kernel_eval(s, x, y) - kx.dot(Ki * ky), 1e-8);
  const double lml = -0.5 * 12 * std::log(2 * std::numbers::pi) - 0.5 * std::log(K.determinant()) - 0.5 * r.dot(Ki * r);
  EXPECT_NEAR(gp.log_marginal_likelihood(), lml, 1e-7);
}

TEST(GP, InterpolatesData) {
  const Dataset D = make_data(15, 2);
  const ConditionedGP gp = condition(spec2d(), D);
  for (std::size_t i = 0; i < D.size(); ++i) {
    EXPECT_NEAR(gp.mean(D.X[i]), D.y[i], 1e-6);
    EXPECT_NEAR(gp.variance(D.X[i]), 0.0, 1e-7);
  }
}

TEST(GP, VarianceIsNonnegativeAndBelowPrior) {
  const ConditionedGP gp = condition(spec2d(), make_data(10, 3));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 200; ++i) {
    const Point x{u(rng), u(rng)};
    const double v = gp.variance(x);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, product_kernel_eval(gp.spec(), x, x) + 1e-12);
  }
}

TEST(GP, RejectsBadData) {
  Dataset D;
  EXPECT_THROW(condition(spec2d(), D), InvalidInput);
  D.append({0.1, 0.2}, 1.0);
  D.append({0.1, 0.2}, 2.0);
  EXPECT_THROW(condition(spec2d(), D), InvalidInput);
  Dataset E;
  E.append({0.5}, 0.0);
  EXPECT_THROW(condition(spec2d(), E), InvalidInput);
}

TEST(GP, JitterEscalatesForNearDuplicates) {
  ProductKernelSpec s;
  s.fields = {LengthscaleField::constant(5.0)};
  s.rbf = RadialBasis::matern(2.5);
  Dataset D;
  for (int i = 0; i < 30; ++i) D.append({0.5 + 1e-9 * i}, 0.0);
  const ConditionedGP gp = condition(s, D);
  EXPECT_GE(gp.jitter(), kDefaultJitter);
}

TEST(LmlGradient, ValueMatchesConditioning) {
  const ProductKernelSpec s = spec2d();
  const Dataset D = make_data(20, 5);
  EXPECT_NEAR(lml_with_gradient(s, D).value, log_marginal_likelihood(s, D), 1e-9);
}

TEST(LmlGradient, MatchesFiniteDifferences) {
  const Dataset D = make_data(18, 6);
  for (FieldKind kind : {FieldKind::PiecewiseLinear, FieldKind::ExpPiecewiseLinear, FieldKind::PiecewiseConstant,
                         FieldKind::Constant}) {
    ProductKernelSpec s = spec2d();
    s.fields[0] = LengthscaleField::make(kind, kind == FieldKind::Constant ? 1 : 5, -1.2);
    auto t = s.theta();
    for (std::size_t j = 2; j < t.size(); ++j) t[j] += 0.1 * std::sin(3.0 * j);
    s = s.with_theta(t);
    const LmlGradient g = lml_with_gradient(s, D);
    for (std::size_t j = 0; j < t.size(); ++j) {
      auto tp = t, tm = t;
      tp[j] += 1e-5;
      tm[j] -= 1e-5;
      const double fd = (log_marginal_likelihood(s.with_theta(tp), D) - log_marginal_likelihood(s.with_theta(tm), D)) / 2e-5;
      EXPECT_NEAR(g.grad[j], fd, 1e-4 * std::max(1.0, std::abs(fd))) << to_string(kind) << " j=" << j;
    }
  }
}

TEST(SamplePaths, MomentsMatchPosterior) {
  ProductKernelSpec s;
  s.fields = {LengthscaleField::constant(0.2)};
  Dataset D;
  D.append({0.1}, 1.0);
  D.append({0.6}, -0.5);
  const ConditionedGP gp = condition(s, D);
  const std::vector<Point> grid{{0.0}, {0.35}, {0.8}};
  std::mt19937_64 rng(9);
  const std::size_t M = 20000;
  const auto paths = sample_paths(gp, grid, M, rng);
  ASSERT_EQ(paths.size(), M);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double m = 0, m2 = 0;
    for (const auto& p : paths) {
      m += p[g];
      m2 += p[g] * p[g];
    }
    m /= M;
    const double var = m2 / M - m * m;
    const double v = gp.variance(grid[g]);
    EXPECT_NEAR(m, gp.mean(grid[g]), 5 * std::sqrt(v / M));
    EXPECT_NEAR(var, v, 5 * v * std::sqrt(2.0 / M));
  }
}
