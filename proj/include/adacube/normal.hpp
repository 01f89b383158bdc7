#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "adacube/error.hpp"

namespace adacube {

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile, p in (0,1).
inline double normal_quantile(double p) {
  detail::require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace adacube
