/**
 * @file gp.hpp
 * @brief Gaussian-process conditioning on the tensor-product kernel.
 *
 * All posterior quantities are centred by the constant prior mean c:
 *   m(x) = c + K_X(x)^T K^{-1} (y - c 1),
 *   k_n(x,y) = k(x,y) - K_X(x)^T K^{-1} K_X(y).
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "adacube/error.hpp"
#include "adacube/kernels.hpp"

namespace adacube {

struct Dataset {
  std::vector<Point> X;
  std::vector<double> y;

  std::size_t size() const { return X.size(); }
  bool empty() const { return X.empty(); }
  std::size_t dim() const { return X.empty() ? 0 : X.front().size(); }

  void append(Point x, double v) {
    X.push_back(std::move(x));
    y.push_back(v);
  }

  bool contains(std::span<const double> x) const {
    for (const auto& p : X)
      if (std::equal(p.begin(), p.end(), x.begin(), x.end())) return true;
    return false;
  }

  void validate() const {
    detail::require(X.size() == y.size(), "Dataset: |X| != |y|");
    for (std::size_t i = 0; i < X.size(); ++i) {
      detail::require(X[i].size() == dim(), "Dataset: inconsistent point dimensions");
      for (std::size_t j = 0; j < i; ++j)
        detail::require(X[i] != X[j], "Dataset: duplicate design point");
    }
  }
};

namespace detail {

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

/// Cholesky of K + jitter I, escalating jitter tenfold up to three times.
inline Factor factorize(const Eigen::MatrixXd& K, double jitter) {
  Factor f;
  for (int attempt = 0; attempt <= 3; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    f.llt.compute(Kj);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      return f;
    }
  }
  throw ConditioningError("Gram matrix not factorizable after jitter escalation");
}

}  // namespace detail

class ConditionedGP {
 public:
  ConditionedGP(ProductKernelSpec spec, Dataset data, double jitter_rel = kDefaultJitter)
      : spec_(std::move(spec)), data_(std::move(data)) {
    spec_.validate();
    detail::require(!data_.empty(), "condition: data must be non-empty");
    data_.validate();
    detail::require(data_.dim() == spec_.dim(), "condition: data dimension does not match kernel");
    auto f = detail::factorize(gram_matrix(spec_, data_.X, 0.0), jitter_rel * sigma2());
    llt_ = std::move(f.llt);
    jitter_ = f.jitter;
    resid_.resize(static_cast<Eigen::Index>(data_.size()));
    for (std::size_t i = 0; i < data_.size(); ++i) resid_(static_cast<Eigen::Index>(i)) = data_.y[i] - spec_.c;
    weights_ = llt_.solve(resid_);
  }

  const ProductKernelSpec& spec() const { return spec_; }
  const Dataset& data() const { return data_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  Eigen::MatrixXd chol() const { return llt_.matrixL(); }
  /// K^{-1} (y - c 1).
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Absolute diagonal jitter actually used.
  double jitter() const { return jitter_; }
  double sigma2() const { return spec_.sigma * spec_.sigma; }

  Eigen::VectorXd cross(std::span<const double> x) const { return cross_covariance(spec_, data_.X, x); }

  /// L^{-1} v.
  Eigen::VectorXd whiten(const Eigen::VectorXd& v) const { return llt_.matrixL().solve(v); }

  double mean(std::span<const double> x) const { return spec_.c + cross(x).dot(weights_); }

  double cov(std::span<const double> x, std::span<const double> y) const {
    const Eigen::VectorXd vx = whiten(cross(x));
    const bool same = std::equal(x.begin(), x.end(), y.begin(), y.end());
    const double kxy = product_kernel_eval(spec_, x, y);
    if (same) return clip(kxy - vx.squaredNorm());
    return kxy - vx.dot(whiten(cross(y)));
  }

  double variance(std::span<const double> x) const { return cov(x, x); }

  double log_det() const {
    const auto& L = llt_.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
  }

  double log_marginal_likelihood() const {
    const auto n = static_cast<double>(data_.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * log_det() - 0.5 * resid_.dot(weights_);
  }

  /// Values within -1e-8 sigma^2 of zero are reported as zero.
  double clip(double v) const { return (v < 0.0 && v > -1e-8 * sigma2()) ? 0.0 : v; }

 private:
  ProductKernelSpec spec_;
  Dataset data_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
  Eigen::VectorXd resid_;
  Eigen::VectorXd weights_;
};

inline ConditionedGP condition(const ProductKernelSpec& spec, const Dataset& data,
                               double jitter_rel = kDefaultJitter) {
  return {spec, data, jitter_rel};
}

inline double posterior_mean(const ConditionedGP& gp, std::span<const double> x) { return gp.mean(x); }

inline double posterior_cov(const ConditionedGP& gp, std::span<const double> x, std::span<const double> y) {
  return gp.cov(x, y);
}

inline double log_marginal_likelihood(const ProductKernelSpec& spec, const Dataset& data,
                                      double jitter_rel = kDefaultJitter) {
  return condition(spec, data, jitter_rel).log_marginal_likelihood();
}

struct LmlGradient {
  double value = 0.0;
  /// Ordered as ProductKernelSpec::theta().
  std::vector<double> grad;
};

/**
 * Log marginal likelihood and its analytic gradient in the unconstrained
 * parameters (c, log sigma, field params).
 *
 * With W = a a^T - K^{-1}, a = K^{-1}(y - c), each partial is tr(W dK)/2.
 * The lengthscale partials use that k_i(x_a, x_b) depends on the field
 * parameters only through l(x_a) and l(x_b).
 */
inline LmlGradient lml_with_gradient(const ProductKernelSpec& spec, const Dataset& data,
                                     double jitter_rel = kDefaultJitter) {
  spec.validate();
  detail::require(!data.empty(), "lml_with_gradient: data must be non-empty");
  detail::require(data.dim() == spec.dim(), "lml_with_gradient: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(data.size());
  const std::size_t d = spec.dim();
  const double s2 = spec.sigma * spec.sigma;

  std::vector<Eigen::MatrixXd> Kd(d, Eigen::MatrixXd(n, n)), Gd(d, Eigen::MatrixXd(n, n));
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> l(static_cast<std::size_t>(n));
    for (Eigen::Index a = 0; a < n; ++a) {
      const double xa = data.X[static_cast<std::size_t>(a)][i];
      detail::check_unit(xa);
      l[static_cast<std::size_t>(a)] = spec.fields[i].value(xa);
    }
    for (Eigen::Index a = 0; a < n; ++a) {
      const double xa = data.X[static_cast<std::size_t>(a)][i];
      const double la = l[static_cast<std::size_t>(a)];
      Kd[i](a, a) = detail::k1d_from_lengths(spec.rbf, 0.0, la, la);
      Gd[i](a, a) = 0.0;
      for (Eigen::Index b = a + 1; b < n; ++b) {
        const double xb = data.X[static_cast<std::size_t>(b)][i];
        const double lb = l[static_cast<std::size_t>(b)];
        const double r = std::abs(xa - xb);
        // Canonical order so the value matches nonstat_k1d bit for bit.
        Kd[i](a, b) = Kd[i](b, a) =
            xa <= xb ? detail::k1d_from_lengths(spec.rbf, r, la, lb) : detail::k1d_from_lengths(spec.rbf, r, lb, la);
        Gd[i](a, b) = detail::k1d_dlx(spec.rbf, r, la, lb);
        Gd[i](b, a) = detail::k1d_dlx(spec.rbf, r, lb, la);
      }
    }
  }

  Eigen::MatrixXd K = Eigen::MatrixXd::Constant(n, n, s2);
  for (std::size_t i = 0; i < d; ++i) K = K.cwiseProduct(Kd[i]);
  auto f = detail::factorize(K, jitter_rel * s2);
  K.diagonal().array() += f.jitter;

  Eigen::VectorXd resid(n);
  for (Eigen::Index a = 0; a < n; ++a) resid(a) = data.y[static_cast<std::size_t>(a)] - spec.c;
  const Eigen::VectorXd alpha = f.llt.solve(resid);
  const auto& L = f.llt.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) logdet += 2.0 * std::log(L(a, a));

  LmlGradient out;
  out.value = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - 0.5 * logdet -
              0.5 * resid.dot(alpha);
  out.grad.assign(spec.theta_size(), 0.0);

  Eigen::MatrixXd W = alpha * alpha.transpose() - f.llt.solve(Eigen::MatrixXd::Identity(n, n));
  out.grad[0] = alpha.sum();
  out.grad[1] = W.cwiseProduct(K).sum();

  std::size_t offset = 2;
  for (std::size_t i = 0; i < d; ++i) {
    Eigen::MatrixXd O = Eigen::MatrixXd::Constant(n, n, s2);
    for (std::size_t j = 0; j < d; ++j)
      if (j != i) O = O.cwiseProduct(Kd[j]);
    const Eigen::VectorXd g = W.cwiseProduct(O).cwiseProduct(Gd[i]).rowwise().sum();
    for (Eigen::Index a = 0; a < n; ++a) {
      const auto sens = spec.fields[i].sensitivity(data.X[static_cast<std::size_t>(a)][i]);
      for (int t = 0; t < sens.count; ++t) out.grad[offset + sens.index[t]] += sens.weight[t] * g(a);
    }
    offset += spec.fields[i].size();
  }
  return out;
}

/// M joint posterior draws on grid, each a vector of grid values.
template <class Rng>
std::vector<std::vector<double>> sample_paths(const ConditionedGP& gp, const std::vector<Point>& grid,
                                              std::size_t M, Rng& rng) {
  detail::require(!grid.empty(), "sample_paths: grid must be non-empty");
  if (M == 0) return {};
  const auto G = static_cast<Eigen::Index>(grid.size());
  const auto n = static_cast<Eigen::Index>(gp.data().size());
  Eigen::MatrixXd Kxg(n, G);
  for (Eigen::Index g = 0; g < G; ++g) Kxg.col(g) = gp.cross(grid[static_cast<std::size_t>(g)]);
  const Eigen::VectorXd mean = (Kxg.transpose() * gp.weights()).array() + gp.spec().c;
  const Eigen::MatrixXd V = gp.llt().matrixL().solve(Kxg);
  Eigen::MatrixXd C = gram_matrix(gp.spec(), grid, 0.0) - V.transpose() * V;
  C = 0.5 * (C + C.transpose()).eval();
  detail::Factor f;
  try {
    f = detail::factorize(C, kDefaultJitter * gp.sigma2());
  } catch (const ConditioningError&) {
    throw SamplingError("sample_paths: posterior covariance not factorizable");
  }
  const Eigen::MatrixXd L = f.llt.matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> out(M);
  Eigen::VectorXd z(G);
  for (std::size_t m = 0; m < M; ++m) {
    for (Eigen::Index g = 0; g < G; ++g) z(g) = normal(rng);
    const Eigen::VectorXd s = mean + L * z;
    out[m].assign(s.data(), s.data() + G);
  }
  return out;
}

}  // namespace adacube
