#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "adacube/kernels.hpp"

using namespace adacube;

TEST(Matern, ClosedFormsAtOne) {
  EXPECT_DOUBLE_EQ(matern_eval(RadialBasis::matern(0.5), 1.0), std::exp(-1.0));
  EXPECT_NEAR(matern_eval(RadialBasis::matern(1.5), 1.0), (1 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(matern_eval(RadialBasis::matern(2.5), 1.0), (1 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0)),
              1e-15);
  for (double nu : {0.5, 1.5, 2.5}) EXPECT_EQ(matern_eval(RadialBasis::matern(nu), 0.0), 1.0);
  EXPECT_EQ(matern_eval(RadialBasis::unit(), 3.0), 1.0);
}

TEST(Matern, RejectsOtherSmoothness) {
  EXPECT_THROW(RadialBasis::matern(1.0), InvalidInput);
  EXPECT_THROW(matern_eval(RadialBasis::matern(1.5), -0.1), InvalidInput);
}

TEST(Matern, DerivativeMatchesFiniteDifference) {
  for (double nu : {0.5, 1.5, 2.5}) {
    const RadialBasis b = RadialBasis::matern(nu);
    for (double d : {0.05, 0.4, 1.3, 3.0}) {
      const double h = 1e-6;
      const double fd = (matern_eval(b, d + h) - matern_eval(b, d - h)) / (2 * h);
      EXPECT_NEAR(matern_derivative(b, d), fd, 1e-8) << nu << " " << d;
    }
  }
}

TEST(Field, PiecewiseLinearInterpolatesExpParams) {
  const LengthscaleField f(FieldKind::PiecewiseLinear, {0.0, 0.5, 1.0}, {0.0, std::log(3.0), std::log(2.0)});
  EXPECT_DOUBLE_EQ(f(0.0), 1.0);
  EXPECT_DOUBLE_EQ(f(0.25), 2.0);
  EXPECT_DOUBLE_EQ(f(0.5), 3.0);
  EXPECT_DOUBLE_EQ(f(1.0), 2.0);
  EXPECT_EQ(f.breakpoints(), std::vector<double>{0.5});
}

TEST(Field, PiecewiseConstantCellsAreHalfOpen) {
  const LengthscaleField f(FieldKind::PiecewiseConstant, {0.0, 0.5, 1.0}, {0.0, std::log(2.0)});
  EXPECT_DOUBLE_EQ(f(0.49), 1.0);
  EXPECT_DOUBLE_EQ(f(0.5), 2.0);
  EXPECT_DOUBLE_EQ(f(1.0), 2.0);
}

TEST(Field, ExpPiecewiseLinearIsGeometricMean) {
  const LengthscaleField f(FieldKind::ExpPiecewiseLinear, {0.0, 1.0}, {std::log(1.0), std::log(4.0)});
  EXPECT_NEAR(f(0.5), 2.0, 1e-14);
}

TEST(Field, UniformKnotsLandOnKnotCells) {
  const LengthscaleField f = LengthscaleField::make(FieldKind::PiecewiseConstant, 10, 0.0)
                                 .with_params({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  for (int j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(f(j / 10.0), std::exp(j)) << j;
}

TEST(Field, SensitivityMatchesFiniteDifference) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (FieldKind kind : {FieldKind::PiecewiseLinear, FieldKind::PiecewiseConstant, FieldKind::ExpPiecewiseLinear,
                         FieldKind::Constant}) {
    LengthscaleField f = LengthscaleField::make(kind, kind == FieldKind::Constant ? 1 : 6, 0.0);
    std::vector<double> p(f.size());
    for (double& v : p) v = 0.5 * n01(rng);
    f = f.with_params(p);
    for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      const auto s = f.sensitivity(x);
      std::vector<double> grad(f.size(), 0.0);
      for (int i = 0; i < s.count; ++i) grad[s.index[i]] += s.weight[i];
      for (std::size_t j = 0; j < f.size(); ++j) {
        auto pp = p, pm = p;
        pp[j] += 1e-6;
        pm[j] -= 1e-6;
        const double fd = (f.with_params(pp)(x) - f.with_params(pm)(x)) / 2e-6;
        EXPECT_NEAR(grad[j], fd, 1e-7) << to_string(kind) << " x=" << x << " j=" << j;
      }
    }
  }
}

TEST(Field, RejectsBadConstruction) {
  EXPECT_THROW(LengthscaleField(FieldKind::PiecewiseLinear, {0.0, 0.6}, {0.0, 0.0}), InvalidInput);
  EXPECT_THROW(LengthscaleField(FieldKind::PiecewiseLinear, {0.0, 1.0}, {0.0}), InvalidInput);
  EXPECT_THROW(LengthscaleField(FieldKind::PiecewiseLinear, {0.0, 0.7, 0.5, 1.0}, {0, 0, 0, 0}), InvalidInput);
  EXPECT_THROW(LengthscaleField::constant(0.0), InvalidInput);
  EXPECT_THROW(LengthscaleField::constant(1.0)(1.5), InvalidInput);
  EXPECT_THROW(field_kind_from_string("spline"), InvalidInput);
}

TEST(Kernel1d, ConstantFieldReducesToScaledStationary) {
  const double l = 0.3;
  const LengthscaleField f = LengthscaleField::constant(l);
  for (double nu : {0.5, 1.5, 2.5}) {
    const RadialBasis b = RadialBasis::matern(nu);
    EXPECT_NEAR(nonstat_k1d(b, f, 0.4, 0.4), 1.0 / std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(nonstat_k1d(b, f, 0.1, 0.6), matern_eval(b, 0.5 / (std::numbers::sqrt2 * l)) / std::numbers::sqrt2,
                1e-15);
  }
}

TEST(Kernel1d, GeneralFormAndSymmetry) {
  const RadialBasis b = RadialBasis::matern(1.5);
  const LengthscaleField f(FieldKind::PiecewiseLinear, {0.0, 1.0}, {std::log(0.1), std::log(0.5)});
  const double x = 0.2, y = 0.7, lx = f(x), ly = f(y);
  const double s = std::sqrt(lx * lx + ly * ly);
  EXPECT_NEAR(nonstat_k1d(b, f, x, y), std::sqrt(lx * ly) / s * matern_eval(b, 0.5 / s), 1e-15);
  EXPECT_EQ(nonstat_k1d(b, f, x, y), nonstat_k1d(b, f, y, x));
  EXPECT_THROW(nonstat_k1d(b, f, -0.01, 0.5), InvalidInput);
}

TEST(Kernel1d, LengthDerivativeMatchesFiniteDifference) {
  const RadialBasis b = RadialBasis::matern(2.5);
  for (auto [r, lx, ly] : {std::tuple{0.3, 0.2, 0.5}, std::tuple{0.0, 0.4, 0.1}, std::tuple{1.0, 0.7, 0.7}}) {
    const double h = 1e-7;
    const double fd =
        (detail::k1d_from_lengths(b, r, lx + h, ly) - detail::k1d_from_lengths(b, r, lx - h, ly)) / (2 * h);
    EXPECT_NEAR(detail::k1d_dlx(b, r, lx, ly), fd, 1e-7);
  }
}

TEST(ProductKernel, GramIsSymmetricPositiveDefinite) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u;
  ProductKernelSpec spec;
  spec.sigma = 1.7;
  spec.fields = {LengthscaleField(FieldKind::PiecewiseLinear, LengthscaleField::uniform_knots(5), {-3, -1, -2, 0, -1}),
                 LengthscaleField::constant(0.2)};
  std::vector<Point> X(40);
  for (auto& p : X) p = {u(rng), u(rng)};
  const Eigen::MatrixXd K = gram_matrix(spec, X, 0.0);
  EXPECT_LT((K - K.transpose()).norm(), 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
  EXPECT_NEAR(K(0, 0), spec.sigma * spec.sigma / 2.0, 1e-14);
}

TEST(ProductKernel, ThetaRoundTrip) {
  ProductKernelSpec spec;
  spec.c = 0.3;
  spec.sigma = 2.0;
  spec.fields = {LengthscaleField::make(FieldKind::PiecewiseLinear, 4, -1.0), LengthscaleField::constant(0.5)};
  ASSERT_EQ(spec.theta_size(), 7u);
  const auto t = spec.theta();
  EXPECT_EQ(spec.with_theta(t), spec);
  std::vector<double> bad(3);
  EXPECT_THROW(spec.with_theta(bad), InvalidInput);
  const Point x{0.1, 0.2}, y{0.1};
  EXPECT_THROW(product_kernel_eval(spec, x, y), InvalidInput);
}
