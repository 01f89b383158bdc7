/**
 * @file avgcase.hpp
 * @brief Full k-ary tree combinatorics and the average-case behaviour of the
 *        adaptive trapezoidal rule under Wiener-process priors.
 *
 * Under the prior f ~ GP(0, lambda min(x,y) + gamma) each node of the
 * recursion accepts independently with probability alpha_q depending only
 * on its depth, so the recursion tree is a Galton-Watson tree.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "adacube/error.hpp"
#include "adacube/normal.hpp"
#include "adacube/rng.hpp"
#include "adacube/tree.hpp"
#include "adacube/trapz.hpp"

namespace adacube {

using BigInt = boost::multiprecision::cpp_int;

struct WienerPrior {
  double lambda = 1.0;
  double gamma = 1.0;
  double a = 0.0;
  double b = 1.0;

  void validate() const {
    detail::require(lambda > 0.0, "WienerPrior: lambda must be positive");
    detail::require(gamma > -a, "WienerPrior: need gamma > -a");
    detail::require(a < b, "WienerPrior: need a < b");
  }
};

struct TrapStudyParams {
  double rho = 0.5;
  unsigned m = 5;
  unsigned k = 2;
  double tau = 0.02;
  WienerPrior prior;

  void validate() const {
    prior.validate();
    detail::require(rho > 0.0, "TrapStudyParams: rho must be positive");
    detail::require(m >= 1, "TrapStudyParams: m must be at least 1");
    detail::require(k >= 2 && k % 2 == 0, "TrapStudyParams: k must be a positive even integer");
    detail::require(tau >= 0.0, "TrapStudyParams: tau must be nonnegative");
  }
};

// ---------------------------------------------------------------------------
// Combinatorics

inline BigInt binomial(unsigned n, unsigned r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigInt c = 1;
  for (unsigned i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

/// Number of k-ary trees with n nodes, binom(nk, n) / ((k-1) n + 1). Exact for every n.
inline BigInt catalan_k(unsigned n, unsigned k) {
  detail::require(k >= 2, "catalan_k: k must be at least 2");
  return binomial(n * k, n) / ((k - 1) * n + 1);
}

/// log of catalan_k via lgamma, for sizes where the exact value is not needed.
inline double log_catalan_k(double n, double k) {
  return std::lgamma(n * k + 1) - std::lgamma(n + 1) - std::lgamma(n * (k - 1) + 1) - std::log((k - 1) * n + 1);
}

/// Node count of the full extension of an n-node k-ary tree.
inline std::size_t tree_extension_size(std::size_t n, std::size_t k) { return n * k + 1; }

/**
 * Full extension of a k-ary tree given by its node labels (closed under
 * parents): every original node becomes an inner node and every empty child
 * slot becomes a leaf.
 */
inline FullKAryTree full_extension(const std::set<NodeLabel>& nodes, unsigned k) {
  FullKAryTree t(k);
  if (nodes.empty()) return t;
  std::vector<NodeLabel> order(nodes.begin(), nodes.end());
  std::sort(order.begin(), order.end(), [](NodeLabel x, NodeLabel y) { return x.q != y.q ? x.q < y.q : x.p < y.p; });
  for (const auto& n : order) {
    detail::require(t.contains(n), "full_extension: node set is not closed under parents");
    t.expand(n);
  }
  return t;
}

inline std::vector<NodeLabel> preorder(const FullKAryTree& tree) { return tree.preorder(); }

/// Shapes (preorder inner/leaf flags) of all full k-ary trees with n inner nodes.
inline std::vector<std::string> enumerate_full_trees(unsigned n, unsigned k) {
  // shapes[j] = all shapes with j inner nodes; a sequence of c subtrees splits n - 1 among k children.
  std::vector<std::vector<std::string>> shapes(n + 1);
  shapes[0] = {"0"};
  for (unsigned total = 1; total <= n; ++total) {
    std::function<void(unsigned, unsigned, std::string)> fill = [&](unsigned child, unsigned left, std::string acc) {
      if (child == k) {
        if (left == 0) shapes[total].push_back(acc);
        return;
      }
      for (unsigned j = 0; j <= left; ++j)
        for (const auto& s : shapes[j]) fill(child + 1, left - j, acc + s);
    };
    fill(0, total - 1, "1");
  }
  return shapes[n];
}

/// Shapes of all full k-ary trees of height at most D.
inline std::vector<std::string> enumerate_trees_by_height(unsigned D, unsigned k) {
  std::vector<std::string> level{"0"};
  for (unsigned h = 1; h <= D; ++h) {
    std::vector<std::string> next{"0"};
    std::function<void(unsigned, std::string)> fill = [&](unsigned child, std::string acc) {
      if (child == k) {
        next.push_back(acc);
        return;
      }
      for (const auto& s : level) fill(child + 1, acc + s);
    };
    fill(0, "1");
    level.swap(next);
  }
  return level;
}

/// Partial sum of sum_n C_n^(k) x^n for n <= N.
inline double catalan_series(double x, unsigned N, unsigned k) {
  double s = 0.0, p = 1.0;
  for (unsigned n = 0; n <= N; ++n, p *= x) s += catalan_k(n, k).convert_to<double>() * p;
  return s;
}

/// Smallest positive root C of C = 1 + x C^k (the k-Catalan generating function), by fixed-point iteration.
inline double catalan_gf(double x, unsigned k) {
  detail::require(x >= 0.0, "catalan_gf: x must be nonnegative");
  double c = 1.0;
  for (int i = 0; i < 100000; ++i) {
    const double next = 1.0 + x * std::pow(c, k);
    if (!std::isfinite(next)) throw InvalidInput("catalan_gf: x outside the radius of convergence");
    if (std::abs(next - c) < 1e-15 * next) return next;
    c = next;
  }
  throw InvalidInput("catalan_gf: x outside the radius of convergence");
}

// ---------------------------------------------------------------------------
// Termination laws

/// Acceptance probability at depth i: 2 Phi(L) - 1, L = 4 m tau (k^{3/2} rho)^i / sqrt(lambda (b-a)^3).
inline double alpha_i(unsigned i, const TrapStudyParams& p) {
  p.validate();
  const double w = p.prior.b - p.prior.a;
  const double L = 4.0 * p.m * p.tau * std::pow(std::pow(p.k, 1.5) * p.rho, static_cast<double>(i)) /
                   std::sqrt(p.prior.lambda * w * w * w);
  return std::erf(L / std::numbers::sqrt2);
}

/// prod over depths of alpha_i^{L_i} (1 - alpha_i)^{V_i}, accumulated in log space.
inline double tree_probability(const FullKAryTree& tree, const TrapStudyParams& p) {
  detail::require(tree.k() == p.k, "tree_probability: tree fan-out does not match params");
  std::vector<std::size_t> leaves, inner;
  tree.depth_profile(leaves, inner);
  double logp = 0.0;
  for (std::size_t q = 0; q < leaves.size(); ++q) {
    const double a = alpha_i(static_cast<unsigned>(q), p);
    if (leaves[q]) logp += static_cast<double>(leaves[q]) * std::log(a);
    if (inner[q]) logp += static_cast<double>(inner[q]) * std::log1p(-a);
  }
  return std::exp(logp);
}

/// P(recursion tree has height <= D) = g_0 with g_D = alpha_D, g_q = alpha_q + (1 - alpha_q) g_{q+1}^k.
inline double prob_height_at_most(unsigned D, const TrapStudyParams& p) {
  double g = alpha_i(D, p);
  for (unsigned q = D; q-- > 0;) {
    const double a = alpha_i(q, p);
    g = a + (1.0 - a) * std::pow(g, p.k);
  }
  return g;
}

struct ExpectedNodes {
  double value = 0.0;
  /// Expected total evaluation count is infinite (rho <= k^{-3/2} and k (1 - alpha_0) >= 1).
  bool diverges = false;
};

/**
 * prod_{i<n} k (1 - alpha_i). The divergence threshold on tau is
 * -Phi^{-1}(1/(2k)) sqrt(lambda (b-a)^3) / (4m), the point where k(1 - alpha) = 1.
 */
inline ExpectedNodes expected_inner_nodes(unsigned n, const TrapStudyParams& p) {
  ExpectedNodes out;
  out.value = 1.0;
  for (unsigned i = 0; i < n; ++i) out.value *= p.k * (1.0 - alpha_i(i, p));
  const double w = p.prior.b - p.prior.a;
  const double thresh = -normal_quantile(1.0 / (2.0 * p.k)) * std::sqrt(p.prior.lambda * w * w * w) / (4.0 * p.m);
  out.diverges = p.rho <= std::pow(static_cast<double>(p.k), -1.5) && p.tau <= thresh;
  return out;
}

/// Non-termination probability for k = 2 and rho = 2^{-3/2}.
inline double nontermination_prob_k2(double alpha) {
  detail::require(alpha >= 0.0 && alpha <= 1.0, "nontermination_prob_k2: alpha must lie in [0,1]");
  return alpha < 0.5 ? (1.0 - 2.0 * alpha) / (1.0 - alpha) : 0.0;
}

/// (lambda / 12) sum (x_{i+1} - x_i)^3.
inline double trap_error_variance(std::span<const double> x, double lambda) {
  detail::require(x.size() >= 2, "trap_error_variance: need at least two abscissae");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    detail::require(x[i] < x[i + 1], "trap_error_variance: abscissae must increase");
    const double h = x[i + 1] - x[i];
    s += h * h * h;
  }
  return lambda / 12.0 * s;
}

/// lower bound erf(c tau)(1 - erf(sqrt(3) c tau)), c = 2 sqrt(2) m / sqrt(lambda (b-a)^3).
inline double prop1_lower_bound(double tau, unsigned m, const WienerPrior& prior) {
  detail::require(tau > 0.0, "prop1_lower_bound: tau must be positive");
  const double w = prior.b - prior.a;
  const double c = 2.0 * std::numbers::sqrt2 * m / std::sqrt(prior.lambda * w * w * w);
  return std::erf(c * tau) * (1.0 - std::erf(std::numbers::sqrt3 * c * tau));
}

// ---------------------------------------------------------------------------
// Wiener paths

/// Path values on an increasing grid in [a,b]. lambda = 0 is allowed and gives a constant path.
template <class Rng>
std::vector<double> wiener_sample(std::span<const double> grid, const WienerPrior& prior, Rng& rng) {
  detail::require(prior.lambda >= 0.0, "wiener_sample: lambda must be nonnegative");
  detail::require(prior.lambda * prior.a + prior.gamma >= 0.0, "wiener_sample: negative variance at a");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(grid.size());
  double prev_x = prior.a;
  double prev_v = std::sqrt(prior.lambda * prior.a + prior.gamma) * normal(rng);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    detail::require(grid[i] >= prior.a && grid[i] <= prior.b, "wiener_sample: grid outside [a,b]");
    if (i > 0) detail::require(grid[i - 1] < grid[i], "wiener_sample: grid must increase");
    prev_v += std::sqrt(prior.lambda * (grid[i] - prev_x)) * normal(rng);
    prev_x = grid[i];
    out[i] = prev_v;
  }
  return out;
}

/**
 * Wiener path realized on demand. A new point between two realized points
 * is drawn from the Brownian bridge; beyond the right end from an increment.
 */
template <class Rng>
class LazyWienerPath {
 public:
  LazyWienerPath(const WienerPrior& prior, Rng& rng) : prior_(prior), rng_(rng) {}

  double operator()(double x) {
    detail::require(x >= prior_.a && x <= prior_.b, "LazyWienerPath: query outside [a,b]");
    if (values_.empty())
      values_.emplace(prior_.a, std::sqrt(prior_.lambda * prior_.a + prior_.gamma) * normal_(rng_));
    auto hi = values_.lower_bound(x);
    if (hi != values_.end() && hi->first == x) return hi->second;
    auto lo = std::prev(hi);
    double v;
    if (hi == values_.end()) {
      v = lo->second + std::sqrt(prior_.lambda * (x - lo->first)) * normal_(rng_);
    } else {
      const double xl = lo->first, xr = hi->first;
      const double mean = lo->second + (hi->second - lo->second) * (x - xl) / (xr - xl);
      const double var = prior_.lambda * (x - xl) * (xr - x) / (xr - xl);
      v = mean + std::sqrt(var) * normal_(rng_);
    }
    values_.emplace_hint(hi, x, v);
    return v;
  }

  const std::map<double, double>& realized() const { return values_; }

 private:
  WienerPrior prior_;
  Rng& rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::map<double, double> values_;
};

// ---------------------------------------------------------------------------
// Monte Carlo study

struct StudyOptions {
  std::uint64_t seed = 1;
  /// Abandon a replicate at its first depth cutoff.
  bool stop_on_cutoff = true;
};

struct StudyResult {
  std::size_t reps = 0;
  std::size_t cutoffs = 0;
  std::size_t single_node = 0;
  /// Terminated replicates with |eps| > tau.
  std::size_t exceed = 0;
  /// Sum over terminated replicates of P(|eps| > tau | tree, path values).
  double exceed_conditional = 0.0;
  /// Histogram of terminated tree shapes keyed by preorder flags.
  std::map<std::string, std::size_t> histogram;
  /// Signed errors I - estimate of terminated replicates.
  std::vector<double> errors;
  /// Signed errors of replicates whose tree is a single node.
  std::vector<double> single_node_errors;

  double p_exceed() const { return static_cast<double>(exceed) / static_cast<double>(reps); }
  double p_exceed_conditional() const { return exceed_conditional / static_cast<double>(reps); }
  double cutoff_rate() const { return static_cast<double>(cutoffs) / static_cast<double>(reps); }
  double single_node_rate() const { return static_cast<double>(single_node) / static_cast<double>(reps); }
};

/**
 * Runs adap_trap on independent Wiener paths. Given the tree and the path
 * values at the evaluated abscissae X, the integral error is
 * N(0, trap_error_variance(X)) and is sampled from that law.
 */
inline StudyResult mc_adaptrap_study(const TrapStudyParams& p, std::size_t n_reps, unsigned max_depth,
                                     const StudyOptions& opt = {}) {
  p.validate();
  detail::require(n_reps >= 1, "mc_adaptrap_study: need at least one replicate");
  TrapConfig cfg;
  cfg.rho = p.rho;
  cfg.m = p.m;
  cfg.k = p.k;
  cfg.max_depth = max_depth;
  cfg.stop_on_cutoff = opt.stop_on_cutoff;
  StudyResult res;
  res.reps = n_reps;
  for (std::size_t r = 0; r < n_reps; ++r) {
    std::mt19937_64 rng(derive_seed(opt.seed, {r}));
    std::normal_distribution<double> normal(0.0, 1.0);
    LazyWienerPath<std::mt19937_64> path(p.prior, rng);
    const AdapTrapResult out = adap_trap(path, p.prior.a, p.prior.b, p.tau, cfg);
    if (!out.terminated) {
      ++res.cutoffs;
      continue;
    }
    std::vector<double> xs;
    for (const auto& [x, v] : distinct_evaluations(out)) xs.push_back(x);
    const double var = trap_error_variance(xs, p.prior.lambda);
    const double eps = std::sqrt(var) * normal(rng);
    res.errors.push_back(eps);
    res.histogram[out.tree.serialize()] += 1;
    if (out.tree.size() == 1) {
      ++res.single_node;
      res.single_node_errors.push_back(eps);
    }
    if (std::abs(eps) > p.tau) ++res.exceed;
    res.exceed_conditional += std::erfc(p.tau / std::sqrt(2.0 * var));
  }
  return res;
}

}  // namespace adacube
