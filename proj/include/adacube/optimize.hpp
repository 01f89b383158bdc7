/**
 * @file optimize.hpp
 * @brief Box-constrained BFGS with a projected Armijo line search.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "adacube/error.hpp"

namespace adacube {

struct BfgsOptions {
  std::size_t max_iter = 200;
  /// Stop when the projected gradient max-norm falls below this.
  double grad_tol = 1e-5;
  /// Stop when an accepted step lowers f by less than f_rel_tol * max(|f|, 1); L-BFGS-B's factr = 1e7.
  double f_rel_tol = 1e7 * std::numeric_limits<double>::epsilon();
  /// Optional box; empty means unbounded.
  std::vector<double> lower, upper;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/**
 * Minimize fg, where fg(x, grad) returns the objective and fills grad.
 * Non-finite objective values are treated as +inf by the line search.
 */
template <class FG>
BfgsResult bfgs_minimize(FG&& fg, std::vector<double> x0, const BfgsOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -inf), hi = Eigen::VectorXd::Constant(n, inf);
  if (!opt.lower.empty()) lo = Eigen::Map<const Eigen::VectorXd>(opt.lower.data(), n);
  if (!opt.upper.empty()) hi = Eigen::Map<const Eigen::VectorXd>(opt.upper.data(), n);
  auto clamp = [&](Eigen::VectorXd v) { return v.cwiseMax(lo).cwiseMin(hi).eval(); };

  BfgsResult res;
  std::vector<double> buf(static_cast<std::size_t>(n)), gbuf(static_cast<std::size_t>(n));
  auto eval = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
    std::copy(v.data(), v.data() + n, buf.begin());
    std::fill(gbuf.begin(), gbuf.end(), 0.0);
    ++res.evaluations;
    double f = fg(buf, gbuf);
    g = Eigen::Map<Eigen::VectorXd>(gbuf.data(), n);
    if (!std::isfinite(f) || !g.allFinite()) f = inf;
    return f;
  };

  Eigen::VectorXd x = clamp(Eigen::Map<Eigen::VectorXd>(x0.data(), n));
  Eigen::VectorXd g(n);
  double f = eval(x, g);
  if (!std::isfinite(f)) throw FittingError("objective is not finite at the starting point");

  auto projected = [&](const Eigen::VectorXd& grad) {
    Eigen::VectorXd pg = grad;
    for (Eigen::Index i = 0; i < n; ++i)
      if ((x(i) <= lo(i) && grad(i) > 0.0) || (x(i) >= hi(i) && grad(i) < 0.0)) pg(i) = 0.0;
    return pg;
  };

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  for (; res.iterations < opt.max_iter; ++res.iterations) {
    const Eigen::VectorXd pg = projected(g);
    if (pg.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -(H * pg);
    for (Eigen::Index i = 0; i < n; ++i)
      if (pg(i) == 0.0) d(i) = 0.0;
    if (g.dot(d) >= 0.0) {
      H.setIdentity();
      fresh = true;
      d = -pg;
    }
    double t = fresh ? std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>()) : 1.0;
    Eigen::VectorXd xt, gt(n);
    double ft = inf;
    bool ok = false;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      xt = clamp(x + t * d);
      ft = eval(xt, gt);
      if (ft <= f + 1e-4 * g.dot(xt - x)) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      if (fresh) break;
      H.setIdentity();
      fresh = true;
      continue;
    }
    const Eigen::VectorXd s = xt - x, y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
      fresh = false;
    }
    const bool stalled = f - ft <= opt.f_rel_tol * std::max({std::abs(f), std::abs(ft), 1.0});
    x = xt;
    f = ft;
    g = gt;
    if (stalled) {
      ++res.iterations;
      res.converged = true;
      break;
    }
  }
  res.x.assign(x.data(), x.data() + n);
  res.value = f;
  return res;
}

}  // namespace adacube
