#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "adacube/synthetic.hpp"

using namespace adacube;

namespace {

double simpson_factor(const SyntheticParams& p, std::size_t i, int n = 400000) {
  const double h = 1.0 / n;
  double s = synthetic_factor(p, i, 0.0) + synthetic_factor(p, i, 1.0);
  for (int j = 1; j < n; ++j) s += (j % 2 ? 4.0 : 2.0) * synthetic_factor(p, i, j * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Bump, SupportAndPeak) {
  EXPECT_DOUBLE_EQ(synthetic_bump(0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(synthetic_bump(0.0, 0.0), std::exp(0.0));
  EXPECT_EQ(synthetic_bump(1.0, 2.0), 0.0);
  EXPECT_EQ(synthetic_bump(-1.5, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(synthetic_bump(0.5, 1.0), synthetic_bump(-0.5, 1.0));
  EXPECT_NEAR(synthetic_bump(0.5, 1.0), std::exp(-1.0 / 0.75), 1e-15);
}

TEST(Sigmoid, SteepLogistic) {
  EXPECT_DOUBLE_EQ(synthetic_sigmoid(0.0), 0.5);
  EXPECT_NEAR(synthetic_sigmoid(0.1), 1.0 / (1.0 + std::exp(-8.0)), 1e-15);
}

TEST(Integrand, ProductOfFactorsAndStepDirection) {
  const SyntheticParams p{{0.5, 0.3}, {0.1, 0.2}, {2.0, 1.0}, {0.0, 1.0}, {1, 0}};
  const std::vector<double> x{0.9, 0.05};
  EXPECT_NEAR(eval_integrand(p, x), synthetic_factor(p, 0, 0.9) * synthetic_factor(p, 1, 0.05), 1e-15);
  // P = 1 steps from -1/2 up to +1/2 across C, P = 0 the other way
  EXPECT_NEAR(synthetic_factor(p, 0, 0.9), 0.5, 1e-12);
  EXPECT_NEAR(synthetic_factor(p, 0, 0.1), -0.5, 1e-12);
  EXPECT_NEAR(synthetic_factor(p, 1, 0.05), 0.5 - synthetic_sigmoid(-0.25), 1e-15);
  const std::vector<double> bad{0.1};
  EXPECT_THROW(eval_integrand(p, bad), InvalidInput);
}

TEST(Reference, MatchesFineSimpson) {
  for (const auto& fx : synthetic_fixtures())
    EXPECT_NEAR(reference_integral(fx.params), simpson_factor(fx.params, 0), 1e-9) << fx.name;
  const SyntheticParams p{{0.5, 0.3}, {0.1, 0.2}, {2.0, 1.0}, {0.0, 1.0}, {1, 0}};
  EXPECT_NEAR(reference_integral(p), simpson_factor(p, 0) * simpson_factor(p, 1), 1e-9);
}

TEST(Reference, CaptionFixturesReproducePrintedIntegrals) {
  for (const char* name : {"fig1", "full_vs_empirical"}) {
    for (const auto& fx : synthetic_fixtures()) {
      if (std::string(fx.name) != name) continue;
      // printed to two or three significant figures
      EXPECT_NEAR(reference_integral(fx.params), fx.printed_integral, 0.01 * std::abs(fx.printed_integral) + 5e-4)
          << name;
    }
  }
  EXPECT_THROW(fixture_params("nope"), InvalidInput);
}

TEST(Sampling, ParameterRangesAndMoments) {
  std::mt19937_64 rng(8);
  const int N = 20000;
  double rsum = 0.0, psum = 0.0;
  for (int i = 0; i < N; ++i) {
    const SyntheticParams p = sample_params(1, rng);
    p.validate();
    EXPECT_GE(p.C[0], 0.1);
    EXPECT_LT(p.C[0], 0.9);
    EXPECT_GE(p.H[0], 0.5 * std::numbers::e);
    EXPECT_LT(p.H[0], 1.5 * std::numbers::e);
    EXPECT_GE(p.F[0], 0.0);
    EXPECT_LT(p.F[0], 5.0);
    EXPECT_GT(p.R[0], 0.0);
    EXPECT_LT(p.R[0], 1.0);
    rsum += p.R[0];
    psum += p.P[0];
  }
  // Beta(5,2) mean 5/7, sd about 0.16
  EXPECT_NEAR(rsum / N, 5.0 / 7.0, 4 * 0.16 / std::sqrt(N));
  EXPECT_NEAR(psum / N, 0.5, 4 * 0.5 / std::sqrt(N));
}

TEST(Sampling, SeededAndDimensioned) {
  std::mt19937_64 a(3), b(3);
  const SyntheticParams p = sample_params(3, a), q = sample_params(3, b);
  EXPECT_EQ(p, q);
  EXPECT_EQ(p.dim(), 3u);
  EXPECT_THROW(sample_params(0, a), InvalidInput);
  SyntheticParams bad = p;
  bad.R[1] = 0.0;
  EXPECT_THROW(reference_integral(bad), InvalidInput);
}
