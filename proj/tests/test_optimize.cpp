#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "adacube/mcmc.hpp"
#include "adacube/optimize.hpp"
#include "adacube/rng.hpp"

using namespace adacube;

namespace {

double rosenbrock(const std::vector<double>& x, std::vector<double>& g) {
  const double a = 1 - x[0], b = x[1] - x[0] * x[0];
  g[0] = -2 * a - 400 * x[0] * b;
  g[1] = 200 * b;
  return a * a + 100 * b * b;
}

}  // namespace

TEST(Bfgs, FindsRosenbrockMinimum) {
  const BfgsResult r = bfgs_minimize(rosenbrock, {-1.2, 1.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 2e-3);
}

TEST(Bfgs, QuadraticSolvedToGradientTolerance) {
  auto q = [](const std::vector<double>& x, std::vector<double>& g) {
    const double a = x[0] - 1, b = x[1] + 2;
    g = {4 * a + b, a + 2 * b};
    return 2 * a * a + a * b + b * b;
  };
  BfgsOptions opt;
  opt.f_rel_tol = 0.0;
  opt.grad_tol = 1e-10;
  const BfgsResult r = bfgs_minimize(q, {0.0, 0.0}, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-9);
  EXPECT_NEAR(r.x[1], -2.0, 1e-9);
}

TEST(Bfgs, RespectsBox) {
  auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    g = {2 * (x[0] - 3), 2 * (x[1] + 3)};
    return (x[0] - 3) * (x[0] - 3) + (x[1] + 3) * (x[1] + 3);
  };
  BfgsOptions opt;
  opt.lower = {-1, -1};
  opt.upper = {1, 1};
  const BfgsResult r = bfgs_minimize(f, {0.0, 0.0}, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_DOUBLE_EQ(r.x[0], 1.0);
  EXPECT_DOUBLE_EQ(r.x[1], -1.0);
}

TEST(Bfgs, NonFiniteStartThrows) {
  auto f = [](const std::vector<double>&, std::vector<double>&) { return NAN; };
  EXPECT_THROW(bfgs_minimize(f, {0.0}), FittingError);
}

TEST(Bfgs, NonFiniteRegionIsAvoided) {
  // log barrier at x = 0; minimum of x - log x at x = 1
  auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    g = {1 - 1 / x[0]};
    return x[0] > 0 ? x[0] - std::log(x[0]) : NAN;
  };
  const BfgsResult r = bfgs_minimize(f, {5.0});
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
}

TEST(Metropolis, RecoversGaussianMoments) {
  MCMCConfig cfg;
  cfg.steps = 200000;
  cfg.burn_in = 2000;
  cfg.thin = 10;
  cfg.proposal_scale = 2.0;
  cfg.seed = 5;
  auto lp = [](std::span<const double> t) { return -0.5 * (t[0] - 2) * (t[0] - 2) / 0.25; };
  const MCMCResult r = metropolis(lp, {0.0}, cfg);
  EXPECT_EQ(r.chain.size(), (cfg.steps - cfg.burn_in) / cfg.thin);
  double m = 0, m2 = 0;
  for (const auto& t : r.chain) {
    m += t[0];
    m2 += t[0] * t[0];
  }
  m /= r.chain.size();
  const double v = m2 / r.chain.size() - m * m;
  EXPECT_NEAR(m, 2.0, 0.02);
  EXPECT_NEAR(v, 0.25, 0.02);
  EXPECT_GT(r.acceptance_rate, 0.05);
  EXPECT_LT(r.acceptance_rate, 0.6);
}

TEST(Metropolis, SameSeedSameChain) {
  MCMCConfig cfg;
  cfg.seed = 77;
  auto lp = [](std::span<const double> t) { return -t[0] * t[0] - std::abs(t[1]); };
  EXPECT_EQ(metropolis(lp, {0.1, 0.1}, cfg).chain, metropolis(lp, {0.1, 0.1}, cfg).chain);
}

TEST(Metropolis, RejectsBadConfigAndStart) {
  MCMCConfig cfg;
  cfg.burn_in = cfg.steps;
  auto lp = [](std::span<const double>) { return 0.0; };
  EXPECT_THROW(metropolis(lp, {0.0}, cfg), InvalidInput);
  auto bad = [](std::span<const double>) { return -INFINITY; };
  EXPECT_THROW(metropolis(bad, {0.0}, MCMCConfig{}), InvalidInput);
}

TEST(TotalVariance, LawOfTotalVariance) {
  const std::vector<double> means{1, 3}, vars{0.5, 1.5};
  EXPECT_DOUBLE_EQ(total_variance_estimate(means, vars), 1.0 + 1.0);
  const std::vector<double> one{4};
  EXPECT_DOUBLE_EQ(total_variance_estimate(one, one), 4.0);
}

TEST(DeriveSeed, DistinctPathsGiveDistinctSeeds) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_NE(derive_seed(0, {}), derive_seed(0, {0}));
}
