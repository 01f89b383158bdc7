#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "adacube/adapt_bc.hpp"
#include "adacube/gp.hpp"
#include "adacube/normal.hpp"

namespace adacube {

/// Evaluator on the cube from one on R^d: x_i = Phi^{-1}(u_i), u_i clamped to [1e-12, 1 - 1e-12].
inline Evaluator gaussian_reparam(Evaluator f) {
  return [f = std::move(f)](std::span<const double> u) {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) x[i] = normal_quantile(std::clamp(u[i], 1e-12, 1.0 - 1e-12));
    return f(x);
  };
}

struct MseBound {
  double value = 0.0;
  double se = 0.0;
};

/// Mean over the holdout of (m(y) - f(y))^2 + k_n(y, y), with its standard error.
inline MseBound mse_bound(const ConditionedGP& gp, const std::vector<Point>& holdout, std::span<const double> values) {
  detail::require(!holdout.empty(), "mse_bound: empty holdout");
  detail::require(holdout.size() == values.size(), "mse_bound: size mismatch");
  std::vector<double> terms;
  terms.reserve(holdout.size());
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    const double r = gp.mean(holdout[i]) - values[i];
    terms.push_back(r * r + std::max(0.0, gp.variance(holdout[i])));
  }
  const auto m = static_cast<double>(terms.size());
  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= m;
  double ss = 0.0;
  for (double t : terms) ss += (t - mean) * (t - mean);
  MseBound out;
  out.value = mean;
  out.se = terms.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  return out;
}

}  // namespace adacube
