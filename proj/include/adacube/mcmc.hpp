#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "adacube/error.hpp"

namespace adacube {

struct MCMCConfig {
  std::size_t steps = 2000;
  std::size_t burn_in = 1000;
  std::size_t thin = 5;
  double proposal_scale = 0.3;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(thin >= 1, "MCMCConfig: thin must be at least 1");
    detail::require(burn_in < steps, "MCMCConfig: burn_in must be smaller than steps");
    detail::require(proposal_scale > 0.0, "MCMCConfig: proposal scale must be positive");
  }
};

struct MCMCResult {
  /// Post-burn-in states at steps burn_in + thin, burn_in + 2 thin, ...
  std::vector<std::vector<double>> chain;
  double acceptance_rate = 0.0;
  std::vector<double> last;
};

/// Gaussian random-walk Metropolis. Non-finite target values are rejected.
template <class LogTarget>
MCMCResult metropolis(LogTarget&& log_target, std::vector<double> theta0, const MCMCConfig& cfg) {
  cfg.validate();
  double q = log_target(std::span<const double>(theta0));
  detail::require(std::isfinite(q), "metropolis: log target not finite at theta0");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  MCMCResult res;
  std::vector<double> theta = std::move(theta0), prop(theta.size());
  std::size_t accepted = 0;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    for (std::size_t i = 0; i < theta.size(); ++i) prop[i] = theta[i] + cfg.proposal_scale * normal(rng);
    const double qp = log_target(std::span<const double>(prop));
    const double u = unif(rng);
    if (std::isfinite(qp) && std::log(u) < qp - q) {
      theta.swap(prop);
      q = qp;
      ++accepted;
    }
    if (step > cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0) res.chain.push_back(theta);
  }
  res.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.steps);
  res.last = theta;
  return res;
}

/// mean(vars) + (1/K) sum (means - mean(means))^2.
inline double total_variance_estimate(std::span<const double> means, std::span<const double> vars) {
  detail::require(!means.empty(), "total_variance_estimate: empty input");
  detail::require(means.size() == vars.size(), "total_variance_estimate: length mismatch");
  const auto K = static_cast<double>(means.size());
  double mbar = 0.0, vbar = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    mbar += means[i];
    vbar += vars[i];
  }
  mbar /= K;
  vbar /= K;
  double spread = 0.0;
  for (double m : means) spread += (m - mbar) * (m - mbar);
  return vbar + spread / K;
}

}  // namespace adacube
