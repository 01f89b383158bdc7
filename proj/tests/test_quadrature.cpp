#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "adacube/normal.hpp"
#include "adacube/quadrature.hpp"

using namespace adacube;

TEST(Quadrature, PolynomialsUpToDegree31AreExactOnOnePanel) {
  for (int p = 0; p <= 31; ++p) {
    auto f = [p](double x) { return std::pow(x, p); };
    const QuadResult r = integrate_adaptive(f, 0.0, 1.0, 1e-14, 0.0, 1);
    EXPECT_NEAR(r.value, 1.0 / (p + 1), 1e-14) << "degree " << p;
  }
}

TEST(Quadrature, SmoothIntegrands) {
  auto e = [](double x) { return std::exp(x); };
  EXPECT_NEAR(integrate_adaptive(e, 0.0, 2.0, 1e-12).value, std::exp(2.0) - 1.0, 1e-12);
  auto s = [](double x) { return std::sin(x); };
  EXPECT_NEAR(integrate_adaptive(s, 0.0, std::numbers::pi, 1e-12).value, 2.0, 1e-12);
}

TEST(Quadrature, EndpointSingularityConverges) {
  auto f = [](double x) { return 1.0 / std::sqrt(x); };
  const QuadResult r = integrate_adaptive(f, 0.0, 1.0, 1e-8, 0.0, 2000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2.0, 1e-7);
}

TEST(Quadrature, KinkNeedsSeveralPanels) {
  auto f = [](double x) { return std::abs(x - 0.3); };
  const QuadResult r = integrate_adaptive(f, 0.0, 1.0, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.panels, 1u);
  EXPECT_NEAR(r.value, 0.5 * (0.09 + 0.49), 1e-12);
}

TEST(Quadrature, ReportsNonConvergenceWhenPanelsRunOut) {
  auto f = [](double x) { return std::sin(1.0 / (x + 1e-3)); };
  const QuadResult r = integrate_adaptive(f, 0.0, 1.0, 1e-14, 0.0, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.panels, 3u);
}

TEST(Quadrature, ReversedIntervalNegates) {
  auto f = [](double x) { return x * x; };
  EXPECT_NEAR(integrate_adaptive(f, 1.0, 0.0, 1e-12).value, -1.0 / 3.0, 1e-14);
  EXPECT_EQ(integrate_adaptive(f, 0.5, 0.5, 1e-12).value, 0.0);
}

TEST(Normal, CdfAndQuantile) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  for (double p : {1e-12, 1e-6, 0.1, 0.3, 0.5, 0.77, 0.999999})
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 * std::max(1.0, p / 1e-6));
}
