/**
 * @file embeddings.hpp
 * @brief Kernel mean embeddings under the uniform measure on [0,1]^d and the
 *        Gaussian law of the integral.
 *
 * Both the single integrals int k_i(x,u) dx and the double integrals
 * int int k_i(x,y) dx dy factor over dimensions, so everything reduces to
 * univariate quadrature split at the lengthscale knots.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "adacube/error.hpp"
#include "adacube/gp.hpp"
#include "adacube/kernels.hpp"
#include "adacube/quadrature.hpp"

namespace adacube {

inline constexpr double kSingleTol = 1e-10;
inline constexpr double kDoubleTol = 1e-9;
inline constexpr std::size_t kPiecePanels = 200;

namespace detail {

inline double k1d_fast(const RadialBasis& rbf, const LengthscaleField& f, double x, double y) {
  if (y < x) std::swap(x, y);
  return k1d_from_lengths(rbf, y - x, f.value(x), f.value(y));
}

inline std::vector<double> cell_edges(const LengthscaleField& field) {
  std::vector<double> e{0.0};
  for (double b : field.breakpoints()) e.push_back(b);
  e.push_back(1.0);
  return e;
}

}  // namespace detail

/// int_0^1 k(x, u) dx, split at the field knots and at x = u.
inline double kernel_mean_1d(const RadialBasis& rbf, const LengthscaleField& field, double u,
                             double tol = kSingleTol) {
  detail::require(u >= 0.0 && u <= 1.0, "kernel_mean_1d: u outside [0,1]");
  std::vector<double> e = detail::cell_edges(field);
  e.push_back(u);
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  const double lu = field.value(u);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < e.size(); ++p) {
    auto f = [&](double x) {
      return x < u ? detail::k1d_from_lengths(rbf, u - x, field.value(x), lu)
                   : detail::k1d_from_lengths(rbf, x - u, lu, field.value(x));
    };
    const QuadResult r = integrate_adaptive(f, e[p], e[p + 1], tol, 0.0, kPiecePanels);
    if (!r.converged) throw EmbeddingError("kernel_mean_1d: quadrature did not converge", p);
    total += r.value;
  }
  return total;
}

/// int_0^1 int_0^1 k(x, y) dx dy over knot-induced cells, using symmetry.
inline double kernel_double_1d(const RadialBasis& rbf, const LengthscaleField& field, double tol = kDoubleTol) {
  const std::vector<double> e = detail::cell_edges(field);
  const std::size_t cells = e.size() - 1;
  const double inner_tol = tol * 1e-3;
  double total = 0.0;
  std::size_t piece = 0;
  for (std::size_t I = 0; I < cells; ++I) {
    for (std::size_t J = I; J < cells; ++J, ++piece) {
      bool inner_ok = true;
      const double ylo = e[J], yhi = e[J + 1];
      auto outer = [&](double x) {
        const double lo = I == J ? x : ylo;
        const double lx = field.value(x);
        auto inner = [&](double y) { return detail::k1d_from_lengths(rbf, y - x, lx, field.value(y)); };
        const QuadResult r = integrate_adaptive(inner, lo, yhi, inner_tol, 0.0, kPiecePanels);
        inner_ok = inner_ok && r.converged;
        return r.value;
      };
      const QuadResult r = integrate_adaptive(outer, e[I], e[I + 1], tol, 0.0, kPiecePanels);
      if (!r.converged || !inner_ok) throw EmbeddingError("kernel_double_1d: quadrature did not converge", piece);
      total += 2.0 * r.value;
    }
  }
  return total;
}

/// N x N grid-sum approximation (1/N^2) sum_ij k(x_i, x_j), x_i = i/(N-1).
inline double kernel_double_1d_grid(const RadialBasis& rbf, const LengthscaleField& field, std::size_t N = 101) {
  detail::require(N >= 2, "kernel_double_1d_grid: need N >= 2");
  std::vector<double> x(N), l(N);
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = static_cast<double>(i) / static_cast<double>(N - 1);
    l[i] = field.value(x[i]);
  }
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    diag += detail::k1d_from_lengths(rbf, 0.0, l[i], l[i]);
    for (std::size_t j = i + 1; j < N; ++j) off += detail::k1d_from_lengths(rbf, x[j] - x[i], l[i], l[j]);
  }
  return (diag + 2.0 * off) / static_cast<double>(N * N);
}

enum class DoubleRule { Adaptive, GridSum };

/**
 * Memo of per-dimension embedding integrals.
 *
 * Entries are keyed by (dimension, exact bits of u) and are valid for one
 * (basis, field) pair per dimension; a different pair resets that dimension
 * and bumps theta_version.
 */
class EmbeddingCache {
 public:
  explicit EmbeddingCache(bool enabled = true, DoubleRule rule = DoubleRule::Adaptive, std::size_t grid_n = 101)
      : enabled_(enabled), rule_(rule), grid_n_(grid_n) {}

  EmbeddingCache(const EmbeddingCache& o)
      : enabled_(o.enabled_), rule_(o.rule_), grid_n_(o.grid_n_), dims_(o.dims_), version_(o.version_) {}

  DoubleRule rule() const { return rule_; }
  std::size_t grid_n() const { return grid_n_; }
  bool enabled() const { return enabled_; }

  std::size_t theta_version() const {
    std::lock_guard<std::mutex> lock(mu_);
    return version_;
  }

  double single(const RadialBasis& rbf, const LengthscaleField& field, std::size_t dim, double u) {
    if (!enabled_) return kernel_mean_1d(rbf, field, u);
    const auto key = std::bit_cast<std::uint64_t>(u);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto& s = state(rbf, field, dim);
      if (auto it = s.single.find(key); it != s.single.end()) return it->second;
    }
    const double v = kernel_mean_1d(rbf, field, u);
    std::lock_guard<std::mutex> lock(mu_);
    state(rbf, field, dim).single[key] = v;
    return v;
  }

  double dbl(const RadialBasis& rbf, const LengthscaleField& field, std::size_t dim) {
    if (!enabled_) return compute_double(rbf, field);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto& s = state(rbf, field, dim);
      if (s.dbl) return *s.dbl;
    }
    const double v = compute_double(rbf, field);
    std::lock_guard<std::mutex> lock(mu_);
    state(rbf, field, dim).dbl = v;
    return v;
  }

  /// Precompute single integrals on a per-axis grid U.
  void warm(const ProductKernelSpec& spec, const std::vector<std::vector<double>>& U) {
    for (std::size_t i = 0; i < spec.dim() && i < U.size(); ++i)
      for (double u : U[i]) single(spec.rbf, spec.fields[i], i, u);
  }

 private:
  struct DimState {
    RadialBasis rbf;
    LengthscaleField field;
    std::unordered_map<std::uint64_t, double> single;
    std::optional<double> dbl;
  };

  double compute_double(const RadialBasis& rbf, const LengthscaleField& field) const {
    return rule_ == DoubleRule::GridSum ? kernel_double_1d_grid(rbf, field, grid_n_) : kernel_double_1d(rbf, field);
  }

  DimState& state(const RadialBasis& rbf, const LengthscaleField& field, std::size_t dim) {
    if (dims_.size() <= dim) dims_.resize(dim + 1);
    auto& s = dims_[dim];
    if (!s || !(s->rbf == rbf) || !(s->field == field)) {
      s = DimState{rbf, field, {}, std::nullopt};
      ++version_;
    }
    return *s;
  }

  bool enabled_;
  DoubleRule rule_;
  std::size_t grid_n_;
  std::vector<std::optional<DimState>> dims_;
  std::size_t version_ = 0;
  mutable std::mutex mu_;
};

struct PosteriorIntegral {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
  /// Variance before clipping at zero.
  double raw_variance = 0.0;

  double variance() const { return sigma * sigma; }
};

namespace detail {

inline PosteriorIntegral make_integral(double mu, double var, std::size_t n) {
  PosteriorIntegral p;
  p.mu = mu;
  p.raw_variance = var;
  p.sigma = std::sqrt(std::max(0.0, var));
  p.n = n;
  return p;
}

}  // namespace detail

/// sigma^2 prod_i int int k_i.
inline double prior_integral_variance(const ProductKernelSpec& spec, EmbeddingCache& cache) {
  double v = spec.sigma * spec.sigma;
  for (std::size_t i = 0; i < spec.dim(); ++i) v *= cache.dbl(spec.rbf, spec.fields[i], i);
  return v;
}

/// z(x) = int k(x', x) dpi(x').
inline double kernel_mean(const ProductKernelSpec& spec, std::span<const double> x, EmbeddingCache& cache) {
  detail::require(x.size() == spec.dim(), "kernel_mean: dimension mismatch");
  double z = spec.sigma * spec.sigma;
  for (std::size_t i = 0; i < spec.dim(); ++i) z *= cache.single(spec.rbf, spec.fields[i], i, x[i]);
  return z;
}

/**
 * Integral law for a conditioned process, with a rank-one score for
 * candidate points. Holds a reference to gp and cache.
 */
class IntegralState {
 public:
  IntegralState(const ConditionedGP& gp, EmbeddingCache& cache) : gp_(gp), cache_(cache) {
    const auto n = static_cast<Eigen::Index>(gp.data().size());
    z_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) z_(i) = kernel_mean(gp.spec(), gp.data().X[static_cast<std::size_t>(i)], cache);
    w_ = gp.whiten(z_);
    prior_var_ = prior_integral_variance(gp.spec(), cache);
    var_ = prior_var_ - w_.squaredNorm();
    mu_ = gp.spec().c + gp.weights().dot(z_);
  }

  PosteriorIntegral current() const {
    double v = var_;
    if (v < 0.0 && v > -1e-8 * gp_.sigma2()) v = 0.0;
    return detail::make_integral(mu_, v, gp_.data().size());
  }

  const Eigen::VectorXd& z() const { return z_; }
  double prior_variance() const { return prior_var_; }

  /// Integral variance after adding x to the design (rank-one update).
  double augmented_variance(std::span<const double> x) const {
    detail::require(!gp_.data().contains(x), "augmented_variance: point already in the design");
    const Eigen::VectorXd v = gp_.whiten(gp_.cross(x));
    const double s = product_kernel_eval(gp_.spec(), x, x) + gp_.jitter() - v.squaredNorm();
    if (!(s > 0.0)) return std::max(0.0, var_);
    const double num = kernel_mean(gp_.spec(), x, cache_) - v.dot(w_);
    return std::max(0.0, var_ - num * num / s);
  }

 private:
  const ConditionedGP& gp_;
  EmbeddingCache& cache_;
  Eigen::VectorXd z_, w_;
  double prior_var_ = 0.0, var_ = 0.0, mu_ = 0.0;
};

inline PosteriorIntegral prior_integral(const ProductKernelSpec& spec, EmbeddingCache& cache) {
  spec.validate();
  return detail::make_integral(spec.c, prior_integral_variance(spec, cache), 0);
}

inline PosteriorIntegral posterior_integral(const ConditionedGP& gp, EmbeddingCache& cache) {
  return IntegralState(gp, cache).current();
}

inline PosteriorIntegral posterior_integral(const ProductKernelSpec& spec, const Dataset& data,
                                            EmbeddingCache& cache) {
  if (data.empty()) return prior_integral(spec, cache);
  return posterior_integral(condition(spec, data), cache);
}

/// Reference implementation: refactorize the design augmented by x_new.
inline double augmented_variance(const ProductKernelSpec& spec, const Dataset& data, EmbeddingCache& cache,
                                 std::span<const double> x_new) {
  detail::require(!data.contains(x_new), "augmented_variance: point already in the design");
  Dataset aug = data;
  aug.append(Point(x_new.begin(), x_new.end()), 0.0);
  return posterior_integral(spec, aug, cache).variance();
}

}  // namespace adacube
