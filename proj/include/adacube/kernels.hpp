/**
 * @file kernels.hpp
 * @brief Matérn radial bases, lengthscale fields and the non-stationary
 *        tensor-product covariance.
 *
 * The univariate kernel is
 *   k(x,y) = sqrt(l(x) l(y)) / s * phi(|x - y| / s),  s = sqrt(l(x)^2 + l(y)^2),
 * and the d-variate covariance is sigma^2 times the product over dimensions.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adacube/error.hpp"

namespace adacube {

using Point = std::vector<double>;

inline constexpr double kDefaultJitter = 1e-10;

enum class RbfFamily { Matern, Unit };

/// Matérn basis with nu = order + 1/2. The Unit family (phi == 1) is a test stub.
struct RadialBasis {
  RbfFamily family = RbfFamily::Matern;
  int order = 1;

  static RadialBasis matern(double nu) {
    const double a = nu - 0.5;
    detail::require(a == 0.0 || a == 1.0 || a == 2.0, "RadialBasis: nu must be 1/2, 3/2 or 5/2");
    return {RbfFamily::Matern, static_cast<int>(a)};
  }
  static RadialBasis unit() { return {RbfFamily::Unit, 0}; }
  double nu() const { return order + 0.5; }
  bool operator==(const RadialBasis&) const = default;
};

inline double matern_eval(const RadialBasis& rbf, double d) {
  detail::require(d >= 0.0, "matern_eval: distance must be nonnegative");
  if (rbf.family == RbfFamily::Unit) return 1.0;
  switch (rbf.order) {
    case 0:
      return std::exp(-d);
    case 1: {
      const double u = std::numbers::sqrt3 * d;
      return (1.0 + u) * std::exp(-u);
    }
    default: {
      const double u = std::sqrt(5.0) * d;
      return (1.0 + u + u * u / 3.0) * std::exp(-u);
    }
  }
}

/// d phi / d dist.
inline double matern_derivative(const RadialBasis& rbf, double d) {
  if (rbf.family == RbfFamily::Unit) return 0.0;
  switch (rbf.order) {
    case 0:
      return -std::exp(-d);
    case 1:
      return -3.0 * d * std::exp(-std::numbers::sqrt3 * d);
    default: {
      const double u = std::sqrt(5.0) * d;
      return -(5.0 / 3.0) * d * (1.0 + u) * std::exp(-u);
    }
  }
}

enum class FieldKind { PiecewiseLinear, PiecewiseConstant, ExpPiecewiseLinear, Constant };

inline std::string to_string(FieldKind k) {
  switch (k) {
    case FieldKind::PiecewiseLinear: return "piecewise_linear";
    case FieldKind::PiecewiseConstant: return "piecewise_constant";
    case FieldKind::ExpPiecewiseLinear: return "exp_piecewise_linear";
    default: return "constant";
  }
}

inline FieldKind field_kind_from_string(const std::string& s) {
  if (s == "piecewise_linear") return FieldKind::PiecewiseLinear;
  if (s == "piecewise_constant") return FieldKind::PiecewiseConstant;
  if (s == "exp_piecewise_linear") return FieldKind::ExpPiecewiseLinear;
  if (s == "constant") return FieldKind::Constant;
  throw InvalidInput("unknown lengthscale field kind: " + s);
}

/**
 * Positive lengthscale function on [0,1].
 *
 * params are unconstrained reals:
 *  - PiecewiseLinear: l interpolates exp(params[j]) at the knots.
 *  - ExpPiecewiseLinear: l = exp of the interpolant of params.
 *  - PiecewiseConstant: l = exp(params[j]) on cell [knots[j], knots[j+1]), last cell closed.
 *  - Constant: l = exp(params[0]).
 */
class LengthscaleField {
 public:
  struct Sensitivity {
    std::array<std::size_t, 2> index{};
    std::array<double, 2> weight{};
    int count = 0;
  };

  LengthscaleField() : LengthscaleField(FieldKind::Constant, {0.0, 1.0}, {0.0}) {}

  LengthscaleField(FieldKind kind, std::vector<double> knots, std::vector<double> params)
      : kind_(kind), knots_(std::move(knots)), params_(std::move(params)) {
    detail::require(knots_.size() >= 2, "LengthscaleField: need at least two knots");
    detail::require(knots_.front() == 0.0 && knots_.back() == 1.0,
                    "LengthscaleField: knots must span [0,1]");
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
      detail::require(knots_[i] < knots_[i + 1], "LengthscaleField: knots must increase");
    const std::size_t want = kind_ == FieldKind::Constant            ? 1
                             : kind_ == FieldKind::PiecewiseConstant ? knots_.size() - 1
                                                                     : knots_.size();
    if (kind_ == FieldKind::Constant)
      detail::require(knots_.size() == 2, "LengthscaleField: constant field takes knots {0,1}");
    detail::require(params_.size() == want, "LengthscaleField: wrong parameter count for kind");
    for (double p : params_) detail::require(std::isfinite(p), "LengthscaleField: non-finite parameter");
    uniform_ = true;
    const double n = static_cast<double>(knots_.size() - 1);
    for (std::size_t i = 0; i < knots_.size(); ++i)
      if (knots_[i] != static_cast<double>(i) / n) uniform_ = false;
    beta_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) beta_[i] = std::exp(params_[i]);
  }

  static std::vector<double> uniform_knots(std::size_t n) {
    detail::require(n >= 2, "uniform_knots: need at least two knots");
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) k[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return k;
  }

  static LengthscaleField constant(double lengthscale) {
    detail::require(lengthscale > 0.0, "LengthscaleField::constant: lengthscale must be positive");
    return {FieldKind::Constant, {0.0, 1.0}, {std::log(lengthscale)}};
  }

  /// Field of the given kind with n_params parameters, all set to value.
  static LengthscaleField make(FieldKind kind, std::size_t n_params, double value) {
    switch (kind) {
      case FieldKind::Constant:
        return {kind, {0.0, 1.0}, {value}};
      case FieldKind::PiecewiseConstant:
        return {kind, uniform_knots(n_params + 1), std::vector<double>(n_params, value)};
      default:
        return {kind, uniform_knots(n_params), std::vector<double>(n_params, value)};
    }
  }

  FieldKind kind() const { return kind_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }

  LengthscaleField with_params(std::vector<double> p) const { return {kind_, knots_, std::move(p)}; }

  double operator()(double x) const {
    detail::require(x >= 0.0 && x <= 1.0, "lengthscale_eval: x outside [0,1]");
    return value(x);
  }

  /// Evaluation without the domain check.
  double value(double x) const {
    switch (kind_) {
      case FieldKind::Constant:
        return beta_[0];
      case FieldKind::PiecewiseConstant:
        return beta_[cell(x)];
      case FieldKind::PiecewiseLinear: {
        const std::size_t j = cell(x);
        const double w = (x - knots_[j]) / (knots_[j + 1] - knots_[j]);
        return (1.0 - w) * beta_[j] + w * beta_[j + 1];
      }
      default: {
        const std::size_t j = cell(x);
        const double w = (x - knots_[j]) / (knots_[j + 1] - knots_[j]);
        return std::exp((1.0 - w) * params_[j] + w * params_[j + 1]);
      }
    }
  }

  /// d l(x) / d params, at most two nonzero entries.
  Sensitivity sensitivity(double x) const {
    Sensitivity s;
    switch (kind_) {
      case FieldKind::Constant:
        s.index[0] = 0;
        s.weight[0] = beta_[0];
        s.count = 1;
        break;
      case FieldKind::PiecewiseConstant: {
        const std::size_t j = cell(x);
        s.index[0] = j;
        s.weight[0] = beta_[j];
        s.count = 1;
        break;
      }
      case FieldKind::PiecewiseLinear: {
        const std::size_t j = cell(x);
        const double w = (x - knots_[j]) / (knots_[j + 1] - knots_[j]);
        s.index = {j, j + 1};
        s.weight = {(1.0 - w) * beta_[j], w * beta_[j + 1]};
        s.count = 2;
        break;
      }
      default: {
        const std::size_t j = cell(x);
        const double w = (x - knots_[j]) / (knots_[j + 1] - knots_[j]);
        const double l = std::exp((1.0 - w) * params_[j] + w * params_[j + 1]);
        s.index = {j, j + 1};
        s.weight = {(1.0 - w) * l, w * l};
        s.count = 2;
        break;
      }
    }
    return s;
  }

  /// Interior points in (0,1) where l is not smooth.
  std::vector<double> breakpoints() const {
    if (kind_ == FieldKind::Constant) return {};
    return {knots_.begin() + 1, knots_.end() - 1};
  }

  bool operator==(const LengthscaleField& o) const {
    return kind_ == o.kind_ && knots_ == o.knots_ && params_ == o.params_;
  }

 private:
  std::size_t cell(double x) const {
    const std::size_t cells = knots_.size() - 1;
    std::size_t j;
    if (uniform_) {
      const double t = x * static_cast<double>(cells);
      j = t <= 0.0 ? 0 : static_cast<std::size_t>(t);
      if (j >= cells) j = cells - 1;
      // Guard the floor against rounding at knots.
      if (j + 1 < cells && x >= knots_[j + 1]) ++j;
      if (j > 0 && x < knots_[j]) --j;
    } else {
      j = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin());
      j = j == 0 ? 0 : j - 1;
      if (j >= cells) j = cells - 1;
    }
    return j;
  }

  FieldKind kind_;
  std::vector<double> knots_;
  std::vector<double> params_;
  std::vector<double> beta_;
  bool uniform_ = false;
};

inline double lengthscale_eval(const LengthscaleField& field, double x) { return field(x); }

namespace detail {

/// Univariate kernel from the distance and the two lengthscales.
inline double k1d_from_lengths(const RadialBasis& rbf, double r, double lx, double ly) {
  if (lx == ly) return std::numbers::sqrt2 / 2.0 * matern_eval(rbf, r / (lx * std::numbers::sqrt2));
  const double s2 = lx * lx + ly * ly;
  const double s = std::sqrt(s2);
  return std::sqrt(lx * ly) / s * matern_eval(rbf, r / s);
}

/// d k / d lx at fixed ly and r.
inline double k1d_dlx(const RadialBasis& rbf, double r, double lx, double ly) {
  const double s2 = lx * lx + ly * ly;
  const double s = std::sqrt(s2);
  const double pre = std::sqrt(lx * ly) / s;
  const double u = r / s;
  const double dpre = pre * (0.5 / lx - lx / s2);
  const double du = -r * lx / (s2 * s);
  return dpre * matern_eval(rbf, u) + pre * matern_derivative(rbf, u) * du;
}

inline void check_unit(double x) {
  require(x >= 0.0 && x <= 1.0, "kernel argument outside [0,1]");
}

}  // namespace detail

inline double nonstat_k1d(const RadialBasis& rbf, const LengthscaleField& field, double x, double y) {
  detail::check_unit(x);
  detail::check_unit(y);
  if (y < x) std::swap(x, y);
  return detail::k1d_from_lengths(rbf, y - x, field.value(x), field.value(y));
}

struct ProductKernelSpec {
  double c = 0.0;
  double sigma = 1.0;
  std::vector<LengthscaleField> fields;
  RadialBasis rbf = RadialBasis::matern(1.5);

  std::size_t dim() const { return fields.size(); }

  void validate() const {
    detail::require(!fields.empty(), "ProductKernelSpec: need at least one dimension");
    detail::require(sigma > 0.0 && std::isfinite(sigma), "ProductKernelSpec: sigma must be positive");
    detail::require(std::isfinite(c), "ProductKernelSpec: c must be finite");
  }

  /// Unconstrained parameter vector (c, log sigma, field params by dimension).
  std::size_t theta_size() const {
    std::size_t n = 2;
    for (const auto& f : fields) n += f.size();
    return n;
  }

  std::vector<double> theta() const {
    std::vector<double> t{c, std::log(sigma)};
    for (const auto& f : fields) t.insert(t.end(), f.params().begin(), f.params().end());
    return t;
  }

  ProductKernelSpec with_theta(std::span<const double> t) const {
    detail::require(t.size() == theta_size(), "ProductKernelSpec::with_theta: wrong length");
    ProductKernelSpec s = *this;
    s.c = t[0];
    s.sigma = std::exp(t[1]);
    std::size_t pos = 2;
    for (auto& f : s.fields) {
      const std::size_t n = f.size();
      f = f.with_params({t.begin() + static_cast<std::ptrdiff_t>(pos),
                         t.begin() + static_cast<std::ptrdiff_t>(pos + n)});
      pos += n;
    }
    return s;
  }

  bool operator==(const ProductKernelSpec&) const = default;
};

inline double product_kernel_eval(const ProductKernelSpec& spec, std::span<const double> x,
                                  std::span<const double> y) {
  detail::require(x.size() == spec.dim() && y.size() == spec.dim(),
                  "product_kernel_eval: dimension mismatch");
  double k = spec.sigma * spec.sigma;
  for (std::size_t i = 0; i < spec.dim(); ++i) k *= nonstat_k1d(spec.rbf, spec.fields[i], x[i], y[i]);
  return k;
}

/// Gram matrix with jitter_rel * sigma^2 added to the diagonal.
inline Eigen::MatrixXd gram_matrix(const ProductKernelSpec& spec, const std::vector<Point>& X,
                                   double jitter_rel = kDefaultJitter) {
  detail::require(!X.empty(), "gram_matrix: empty point list");
  const auto n = static_cast<Eigen::Index>(X.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = product_kernel_eval(spec, X[i], X[i]) + jitter_rel * spec.sigma * spec.sigma;
    for (Eigen::Index j = i + 1; j < n; ++j) K(i, j) = K(j, i) = product_kernel_eval(spec, X[i], X[j]);
  }
  return K;
}

/// Cross-covariance vector K_X(x).
inline Eigen::VectorXd cross_covariance(const ProductKernelSpec& spec, const std::vector<Point>& X,
                                        std::span<const double> x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(X.size()));
  for (std::size_t i = 0; i < X.size(); ++i) v(static_cast<Eigen::Index>(i)) = product_kernel_eval(spec, X[i], x);
  return v;
}

}  // namespace adacube
