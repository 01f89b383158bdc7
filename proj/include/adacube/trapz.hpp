/**
 * @file trapz.hpp
 * @brief Composite and recursive adaptive trapezoidal rules.
 *
 * adap_trap records its recursion as a FullKAryTree. Node abscissae are
 * generated from integer indices x = a + (b - a) * j / (2m k^q) with the
 * fraction reduced first, so the same point reached from different nodes
 * always has the same binary representation.
 */
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adacube/error.hpp"
#include "adacube/tree.hpp"

namespace adacube {

struct TrapConfig {
  double rho = 0.5;
  unsigned m = 5;
  unsigned k = 2;
  unsigned max_depth = 40;
  bool memoise = false;
  /// Abandon the whole run at the first depth cutoff (used by Monte Carlo studies).
  bool stop_on_cutoff = false;

  void validate() const {
    detail::require(rho > 0.0, "TrapConfig: rho must be positive");
    detail::require(m >= 1, "TrapConfig: m must be at least 1");
    detail::require(k >= 2, "TrapConfig: k must be at least 2");
    detail::require(max_depth >= 1, "TrapConfig: max_depth must be at least 1");
    detail::require(!memoise || m % k == 0, "TrapConfig: memoise requires m to be a multiple of k");
  }
};

struct AdapTrapResult {
  double estimate = 0.0;
  FullKAryTree tree{2};
  /// Every evaluator invocation in call order.
  std::vector<std::pair<double, double>> evaluations;
  /// Signed Q2 - Q1 per visited node.
  std::map<NodeLabel, double> local_errors;
  bool terminated = true;
  /// Set when stop_on_cutoff cut the run short; estimate is then partial.
  bool aborted = false;
  std::size_t n_evals = 0;
  std::vector<NodeLabel> truncated;
};

namespace detail {

template <class F>
double checked_eval(F& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw EvaluationError("integrand returned a non-finite value", x);
  return v;
}

}  // namespace detail

template <class F>
double trap_rule(F&& f, double a, double b, unsigned n) {
  detail::require(a < b, "trap_rule: need a < b");
  detail::require(n >= 1, "trap_rule: need n >= 1");
  double s = detail::checked_eval(f, a) + detail::checked_eval(f, b);
  for (unsigned i = 1; i < n; ++i) s += 2.0 * detail::checked_eval(f, a + i * (b - a) / n);
  return (b - a) / (2.0 * n) * s;
}

inline double trap_rule_nonuniform(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() >= 2, "trap_rule_nonuniform: need at least two abscissae");
  detail::require(x.size() == y.size(), "trap_rule_nonuniform: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    detail::require(x[i] < x[i + 1], "trap_rule_nonuniform: abscissae must increase");
    s += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  }
  return s;
}

namespace detail {

struct CutoffAbort {};

template <class F>
class AdapTrapRun {
 public:
  AdapTrapRun(F& f, double a, double b, const TrapConfig& cfg, AdapTrapResult& out)
      : f_(f), a_(a), b_(b), cfg_(cfg), out_(out) {
    // 2m k^max_depth must fit the 128-bit index arithmetic.
    unsigned __int128 d = 2 * cfg.m;
    for (unsigned i = 0; i < cfg.max_depth; ++i) {
      detail::require(d <= (~static_cast<unsigned __int128>(0)) / cfg.k,
                      "adap_trap: max_depth too large for fan-out k");
      d *= cfg.k;
    }
  }

  double node(NodeLabel n, double tol) {
    const unsigned twom = 2 * cfg_.m;
    unsigned __int128 denom = twom;
    for (unsigned i = 0; i < n.q; ++i) denom *= cfg_.k;
    const unsigned __int128 first = static_cast<unsigned __int128>(n.p - 1) * twom;

    std::vector<double> v(twom + 1);
    double xlo = 0.0, xhi = 0.0;
    for (unsigned j = 0; j <= twom; ++j) {
      const double x = abscissa(first + j, denom);
      if (j == 0) xlo = x;
      if (j == twom) xhi = x;
      v[j] = value(x);
    }
    const double w = xhi - xlo;
    double s1 = v[0] + v[twom], s2 = s1;
    for (unsigned i = 1; i < twom; ++i) {
      s2 += 2.0 * v[i];
      if (i % 2 == 0) s1 += 2.0 * v[i];
    }
    const double q1 = w / (2.0 * cfg_.m) * s1;
    const double q2 = w / (2.0 * twom) * s2;
    const double err = q2 - q1;
    out_.local_errors[n] = err;
    if (std::abs(err) < tol) return q2;
    if (n.q >= cfg_.max_depth) {
      out_.terminated = false;
      out_.truncated.push_back(n);
      if (cfg_.stop_on_cutoff) throw CutoffAbort{};
      return q2;
    }
    out_.tree.expand(n);
    double sum = 0.0;
    for (unsigned r = 1; r <= cfg_.k; ++r) sum += node(out_.tree.child(n, r), tol * cfg_.rho);
    return sum;
  }

 private:
  double abscissa(unsigned __int128 j, unsigned __int128 denom) const {
    if (j == 0) return a_;
    if (j == denom) return b_;
    unsigned __int128 x = j, y = denom;
    while (y != 0) {
      const unsigned __int128 t = x % y;
      x = y;
      y = t;
    }
    const double t = static_cast<double>(j / x) / static_cast<double>(denom / x);
    return a_ + (b_ - a_) * t;
  }

  double value(double x) {
    if (cfg_.memoise) {
      const auto key = std::bit_cast<std::uint64_t>(x);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
      const double v = checked_eval(f_, x);
      cache_.emplace(key, v);
      out_.evaluations.emplace_back(x, v);
      return v;
    }
    const double v = checked_eval(f_, x);
    out_.evaluations.emplace_back(x, v);
    return v;
  }

  F& f_;
  double a_, b_;
  const TrapConfig& cfg_;
  AdapTrapResult& out_;
  std::unordered_map<std::uint64_t, double> cache_;
};

}  // namespace detail

/// Recursive adaptive trapezoidal rule on [a,b] with tolerance tau.
template <class F>
AdapTrapResult adap_trap(F&& f, double a, double b, double tau, const TrapConfig& cfg = {}) {
  detail::require(a < b, "adap_trap: need a < b");
  detail::require(tau > 0.0, "adap_trap: tau must be positive");
  cfg.validate();
  AdapTrapResult out;
  out.tree = FullKAryTree(cfg.k);
  detail::AdapTrapRun<std::remove_reference_t<F>> run(f, a, b, cfg, out);
  try {
    out.estimate = run.node({1, 0}, tau);
  } catch (const detail::CutoffAbort&) {
    out.aborted = true;
    out.estimate = std::nan("");
  }
  out.n_evals = out.evaluations.size();
  return out;
}

/// Distinct abscissae among the evaluations, sorted.
inline std::vector<std::pair<double, double>> distinct_evaluations(const AdapTrapResult& r) {
  std::map<double, double> seen;
  for (const auto& [x, v] : r.evaluations) seen.emplace(x, v);
  return {seen.begin(), seen.end()};
}

}  // namespace adacube
