/**
 * @file adapt_bc.hpp
 * @brief Sequential Bayesian cubature: E-AdapBC, StdBC and the fully Bayesian
 *        AdapBC, with empirical-Bayes fitting and candidate generation.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "adacube/embeddings.hpp"
#include "adacube/error.hpp"
#include "adacube/gp.hpp"
#include "adacube/kernels.hpp"
#include "adacube/mcmc.hpp"
#include "adacube/optimize.hpp"
#include "adacube/rng.hpp"

namespace adacube {

using Evaluator = std::function<double(std::span<const double>)>;

// ---------------------------------------------------------------------------
// Regularizer

enum class PenaltyCombine { Product, Sum };

/// r = prod_i (l1 |l_i|_1 + l2 |1/l_i|_1), or the sum over i in Sum mode.
struct Regularizer {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  PenaltyCombine combine = PenaltyCombine::Product;

  bool is_zero() const { return lambda1 == 0.0 && lambda2 == 0.0; }
};

namespace detail {

/// (e^d - 1) / d, stable near 0.
inline double expm1_ratio(double d) { return d == 0.0 ? 1.0 : std::expm1(d) / d; }

}  // namespace detail

/// int_0^1 l(x) dx.
inline double field_l1(const LengthscaleField& f) {
  const auto& k = f.knots();
  const auto& p = f.params();
  double s = 0.0;
  switch (f.kind()) {
    case FieldKind::Constant:
      return std::exp(p[0]);
    case FieldKind::PiecewiseConstant:
      for (std::size_t j = 0; j < p.size(); ++j) s += (k[j + 1] - k[j]) * std::exp(p[j]);
      return s;
    case FieldKind::PiecewiseLinear:
      for (std::size_t j = 0; j + 1 < p.size(); ++j) s += 0.5 * (k[j + 1] - k[j]) * (std::exp(p[j]) + std::exp(p[j + 1]));
      return s;
    default:
      for (std::size_t j = 0; j + 1 < p.size(); ++j)
        s += (k[j + 1] - k[j]) * std::exp(p[j]) * detail::expm1_ratio(p[j + 1] - p[j]);
      return s;
  }
}

/// int_0^1 1/l(x) dx.
inline double field_inv_l1(const LengthscaleField& f) {
  const auto& k = f.knots();
  const auto& p = f.params();
  double s = 0.0;
  switch (f.kind()) {
    case FieldKind::Constant:
      return std::exp(-p[0]);
    case FieldKind::PiecewiseConstant:
      for (std::size_t j = 0; j < p.size(); ++j) s += (k[j + 1] - k[j]) * std::exp(-p[j]);
      return s;
    case FieldKind::PiecewiseLinear:
      // h (ln b2 - ln b1) / (b2 - b1) = h / b1 * d / expm1(d), d = ln b2 - ln b1.
      for (std::size_t j = 0; j + 1 < p.size(); ++j)
        s += (k[j + 1] - k[j]) * std::exp(-p[j]) / detail::expm1_ratio(p[j + 1] - p[j]);
      return s;
    default:
      for (std::size_t j = 0; j + 1 < p.size(); ++j)
        s += (k[j + 1] - k[j]) * std::exp(-p[j]) * detail::expm1_ratio(p[j] - p[j + 1]);
      return s;
  }
}

inline double regularizer_value(const Regularizer& reg, const ProductKernelSpec& spec) {
  if (reg.is_zero()) return 0.0;
  double r = reg.combine == PenaltyCombine::Product ? 1.0 : 0.0;
  for (const auto& f : spec.fields) {
    const double term = reg.lambda1 * field_l1(f) + reg.lambda2 * field_inv_l1(f);
    if (reg.combine == PenaltyCombine::Product) r *= term;
    else r += term;
  }
  return r;
}

/// Penalty used by StdBC: none in one dimension, 2 sum_i l_i otherwise.
inline Regularizer stdbc_regularizer(std::size_t d) {
  if (d == 1) return {};
  return {2.0, 0.0, PenaltyCombine::Sum};
}

// ---------------------------------------------------------------------------
// Empirical Bayes

enum class GradientMode { Analytic, FiniteDifference };

struct FitOptions {
  std::size_t max_iter = 200;
  double grad_tol = 1e-5;
  GradientMode gradient = GradientMode::Analytic;
  /// Relative central-difference step.
  double fd_step = 1e-6;
  double jitter = kDefaultJitter;
  // Box on the unconstrained parameters; keeps the Gram matrix representable.
  double log_sigma_min = -25.0, log_sigma_max = 12.0;
  double field_min = -12.0, field_max = 6.0;
};

/// log p(D | theta) - r(theta).
inline double eb_objective(const ProductKernelSpec& spec, const Dataset& data, const Regularizer& reg,
                           double jitter = kDefaultJitter) {
  return log_marginal_likelihood(spec, data, jitter) - regularizer_value(reg, spec);
}

namespace detail {

template <class F>
void central_difference(F&& f, std::span<const double> x, double step, std::span<double> grad) {
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    const double fp = f(xp);
    xp[j] = x[j] - h;
    const double fm = f(xp);
    xp[j] = x[j];
    grad[j] = (fp - fm) / (2.0 * h);
  }
}

}  // namespace detail

/// Objective value and gradient in theta coordinates (for maximization).
inline double eb_value_and_gradient(const ProductKernelSpec& base, const Dataset& data, const Regularizer& reg,
                                    const FitOptions& opt, std::span<const double> theta, std::span<double> grad) {
  const ProductKernelSpec spec = base.with_theta(theta);
  auto reg_at = [&](const std::vector<double>& t) { return regularizer_value(reg, base.with_theta(t)); };
  if (opt.gradient == GradientMode::FiniteDifference) {
    auto obj = [&](const std::vector<double>& t) {
      try {
        return eb_objective(base.with_theta(t), data, reg, opt.jitter);
      } catch (const ConditioningError&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
    detail::central_difference(obj, theta, opt.fd_step, grad);
    return obj(std::vector<double>(theta.begin(), theta.end()));
  }
  const LmlGradient lg = lml_with_gradient(spec, data, opt.jitter);
  std::copy(lg.grad.begin(), lg.grad.end(), grad.begin());
  if (!reg.is_zero()) {
    std::vector<double> rg(theta.size());
    detail::central_difference(reg_at, theta, opt.fd_step, rg);
    // c and sigma do not enter the penalty.
    for (std::size_t j = 2; j < theta.size(); ++j) grad[j] -= rg[j];
  }
  return lg.value - regularizer_value(reg, spec);
}

/// Penalized marginal-likelihood maximization by BFGS, warm-started at init.
inline ProductKernelSpec fit_theta_eb(const Dataset& data, const ProductKernelSpec& init, const Regularizer& reg,
                                      const FitOptions& opt = {}) {
  detail::require(!data.empty(), "fit_theta_eb: data must be non-empty");
  init.validate();
  const std::size_t n = init.theta_size();
  BfgsOptions bo;
  bo.max_iter = opt.max_iter;
  bo.grad_tol = opt.grad_tol;
  bo.lower.assign(n, opt.field_min);
  bo.upper.assign(n, opt.field_max);
  bo.lower[0] = -std::numeric_limits<double>::infinity();
  bo.upper[0] = std::numeric_limits<double>::infinity();
  bo.lower[1] = opt.log_sigma_min;
  bo.upper[1] = opt.log_sigma_max;

  auto neg = [&](const std::vector<double>& t, std::vector<double>& g) {
    double v;
    try {
      v = eb_value_and_gradient(init, data, reg, opt, t, g);
    } catch (const ConditioningError&) {
      return std::numeric_limits<double>::infinity();
    }
    for (double& x : g) x = -x;
    return -v;
  };

  std::vector<double> t0 = init.theta();
  std::vector<double> g0(n);
  const double f0 = neg(t0, g0);
  if (!std::isfinite(f0)) throw FittingError("fit_theta_eb: objective not finite at the initial theta");
  const BfgsResult r = bfgs_minimize(neg, t0, bo);
  if (!(r.value <= f0)) return init;
  return init.with_theta(r.x);
}

// ---------------------------------------------------------------------------
// Candidate sets

inline std::vector<Point> candidate_set_1d(const Dataset& data) {
  detail::require(data.dim() == 1, "candidate_set_1d: data must be one-dimensional");
  detail::require(data.size() >= 2, "candidate_set_1d: need at least two data points");
  std::vector<double> x;
  x.reserve(data.size());
  for (const auto& p : data.X) x.push_back(p[0]);
  std::sort(x.begin(), x.end());
  std::vector<Point> out;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) out.push_back({0.5 * (x[i] + x[i + 1])});
  return out;
}

/// Uniform sample without replacement of K_n points of U^d not in used.
template <class Rng>
std::vector<Point> candidate_set_grid(const std::vector<std::vector<double>>& U, const std::vector<Point>& used,
                                      std::size_t K_n, Rng& rng) {
  detail::require(!U.empty(), "candidate_set_grid: need at least one axis");
  const std::size_t d = U.size();
  const std::set<Point> taken(used.begin(), used.end());
  std::size_t total = 1;
  for (const auto& ax : U) {
    detail::require(!ax.empty(), "candidate_set_grid: empty axis");
    total *= ax.size();
  }
  auto point_at = [&](std::size_t idx) {
    Point p(d);
    for (std::size_t i = d; i-- > 0;) {
      p[i] = U[i][idx % U[i].size()];
      idx /= U[i].size();
    }
    return p;
  };
  std::vector<std::uint32_t> avail;
  avail.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx)
    if (taken.empty() || !taken.count(point_at(idx))) avail.push_back(static_cast<std::uint32_t>(idx));
  detail::require(avail.size() >= K_n, "candidate_set_grid: not enough unused grid points");
  for (std::size_t i = 0; i < K_n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, avail.size() - 1);
    std::swap(avail[i], avail[pick(rng)]);
  }
  std::vector<Point> out;
  out.reserve(K_n);
  for (std::size_t i = 0; i < K_n; ++i) out.push_back(point_at(avail[i]));
  return out;
}

/// Tensor grid of per-axis values, last axis varying fastest.
inline std::vector<Point> tensor_grid(const std::vector<std::vector<double>>& axes) {
  std::vector<Point> out{{}};
  for (const auto& ax : axes) {
    std::vector<Point> next;
    for (const auto& p : out)
      for (double v : ax) {
        Point q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    out.swap(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sequential loops

struct StopRule {
  std::optional<double> tau;
  /// Total number of evaluations, including the initial design.
  std::optional<std::size_t> budget;
};

enum class CandidateKind { Midpoints, Grid };

struct CandidateRule {
  CandidateKind kind = CandidateKind::Midpoints;
  std::vector<std::vector<double>> axes;
  /// K_n = K + 1 - n on the grid.
  std::size_t K = 500;
};

struct ModelConfig {
  RadialBasis rbf = RadialBasis::matern(1.5);
  FieldKind field = FieldKind::PiecewiseLinear;
  /// Number of field parameters per dimension.
  std::size_t field_size = 11;
  double init_field_param = -1.0;
};

enum class StopReason { Tolerance, Budget, EvaluationFailure };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Tolerance: return "tolerance";
    case StopReason::Budget: return "budget";
    default: return "evaluation_failure";
  }
}

struct BCRecord {
  std::size_t n = 0;
  Point x;
  double y = 0.0;
  std::vector<double> theta;
  double mu = 0.0;
  double sigma = 0.0;
  /// Seconds spent fitting and scoring; not part of deterministic output.
  double aux_seconds = 0.0;
};

struct BCTrace {
  std::vector<BCRecord> records;
  PosteriorIntegral final;
  StopReason stopped_by = StopReason::Budget;
  std::string error;
  Dataset data;
  ProductKernelSpec spec;
};

struct BCOptions {
  StopRule stop;
  ModelConfig model;
  Regularizer reg;
  FitOptions fit;
  CandidateRule candidates;
  DoubleRule double_rule = DoubleRule::Adaptive;
  std::size_t grid_n = 101;
  std::uint64_t seed = 0;
};

/// c = mean(y), sigma = sd(y) (1 if zero), fields at the configured value.
inline ProductKernelSpec initial_spec(const ModelConfig& model, const Dataset& data) {
  detail::require(!data.empty(), "initial_spec: data must be non-empty");
  double mean = 0.0;
  for (double v : data.y) mean += v;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double v : data.y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(data.size());
  ProductKernelSpec s;
  s.c = mean;
  s.sigma = var > 0.0 ? std::sqrt(var) : 1.0;
  s.rbf = model.rbf;
  const std::size_t np = model.field == FieldKind::Constant ? 1 : model.field_size;
  s.fields.assign(data.dim(), LengthscaleField::make(model.field, np, model.init_field_param));
  return s;
}

namespace detail {

inline double checked_value(const Evaluator& f, std::span<const double> x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw EvaluationError("integrand returned a non-finite value", x.empty() ? 0.0 : x[0]);
  return v;
}

template <class Rng>
std::vector<Point> make_candidates(const CandidateRule& rule, const Dataset& data, std::size_t iteration, Rng& rng) {
  if (rule.kind == CandidateKind::Midpoints) return candidate_set_1d(data);
  std::size_t total = 1;
  for (const auto& ax : rule.axes) total *= ax.size();
  const std::size_t want = rule.K + 1 > iteration ? rule.K + 1 - iteration : 1;
  const std::size_t avail = total > data.size() ? total - data.size() : 0;
  return candidate_set_grid(rule.axes, data.X, std::min(want, avail), rng);
}

inline void validate_stop(const StopRule& stop) {
  require(stop.tau || stop.budget, "stop rule needs a tolerance or a budget");
  if (stop.tau) require(*stop.tau > 0.0, "stop tolerance must be positive");
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

/**
 * Empirical-Bayes adaptive Bayesian cubature.
 *
 * Each iteration refits theta, scores every candidate by the integral
 * variance after adding it (which does not depend on the unseen value),
 * evaluates the argmin (lowest index on ties) and records the new law.
 */
inline BCTrace e_adap_bc(const Evaluator& f, const Dataset& D0, const BCOptions& opt) {
  detail::require(!D0.empty(), "e_adap_bc: initial design must be non-empty");
  D0.validate();
  detail::validate_stop(opt.stop);
  BCTrace trace;
  trace.data = D0;
  ProductKernelSpec spec = initial_spec(opt.model, D0);
  EmbeddingCache cache(true, opt.double_rule, opt.grid_n);
  std::mt19937_64 rng(derive_seed(opt.seed, {1}));
  auto& D = trace.data;

  for (std::size_t it = 1;; ++it) {
    if (opt.stop.budget && D.size() >= *opt.stop.budget) {
      trace.stopped_by = StopReason::Budget;
      break;
    }
    const auto t0 = detail::Clock::now();
    spec = fit_theta_eb(D, spec, opt.reg, opt.fit);
    const ConditionedGP gp = condition(spec, D, opt.fit.jitter);
    const IntegralState state(gp, cache);
    const std::vector<Point> cands = detail::make_candidates(opt.candidates, D, it, rng);
    detail::require(!cands.empty(), "e_adap_bc: candidate set is empty");
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (D.contains(cands[c])) continue;
      const double v = state.augmented_variance(cands[c]);
      if (v < best_v) {
        best_v = v;
        best = c;
      }
    }
    const double aux = detail::seconds_since(t0);
    BCRecord rec;
    rec.n = D.size() + 1;
    rec.x = cands[best];
    try {
      rec.y = detail::checked_value(f, rec.x);
    } catch (const std::exception& e) {
      trace.stopped_by = StopReason::EvaluationFailure;
      trace.error = e.what();
      break;
    }
    D.append(rec.x, rec.y);
    const PosteriorIntegral pi = posterior_integral(condition(spec, D, opt.fit.jitter), cache);
    rec.theta = spec.theta();
    rec.mu = pi.mu;
    rec.sigma = pi.sigma;
    rec.aux_seconds = aux;
    trace.records.push_back(rec);
    trace.final = pi;
    if (opt.stop.tau && pi.sigma < *opt.stop.tau) {
      trace.stopped_by = StopReason::Tolerance;
      break;
    }
  }
  if (trace.records.empty() || trace.stopped_by == StopReason::EvaluationFailure) {
    if (trace.records.empty()) spec = fit_theta_eb(D, spec, opt.reg, opt.fit);
    trace.final = posterior_integral(condition(spec, D, opt.fit.jitter), cache);
  }
  trace.spec = spec;
  return trace;
}

/// E-AdapBC with a constant lengthscale per dimension.
inline BCTrace std_bc(const Evaluator& f, const Dataset& D0, BCOptions opt) {
  opt.model.field = FieldKind::Constant;
  opt.model.field_size = 1;
  return e_adap_bc(f, D0, opt);
}

// ---------------------------------------------------------------------------
// Fully Bayesian AdapBC

struct AdapBCOptions {
  StopRule stop;
  ModelConfig model;
  CandidateRule candidates;
  double prior_mean = -1.0;
  double prior_var = 2.0;
  std::size_t M = 8;
  std::size_t K = 8;
  std::size_t J = 50;
  std::size_t burn_in = 1000;
  std::size_t thin = 5;
  /// Proposal scale max(floor, scale0 - slope * n) at iteration n = 0, 1, ...
  double scale0 = 0.3;
  double scale_slope = 0.007;
  double scale_floor = 0.01;
  DoubleRule double_rule = DoubleRule::GridSum;
  std::size_t grid_n = 101;
  double jitter = kDefaultJitter;
  std::uint64_t seed = 0;

  double proposal_scale(std::size_t n) const {
    return std::max(scale_floor, scale0 - scale_slope * static_cast<double>(n));
  }
};

namespace detail {

inline double log_normal_prior(std::span<const double> t, double mean, double var) {
  double s = 0.0;
  for (double v : t) s += (v - mean) * (v - mean);
  return -0.5 * s / var - 0.5 * static_cast<double>(t.size()) * std::log(2.0 * std::numbers::pi * var);
}

struct ThetaLaw {
  double mean = 0.0;
  double var = 0.0;
};

}  // namespace detail

/**
 * Fully Bayesian adaptive Bayesian cubature with theta integrated out by
 * Metropolis sampling. Expected integral variance at each candidate is
 * averaged over M ancestral fantasies, each scored by the law of total
 * variance over K posterior theta draws.
 */
inline BCTrace adap_bc(const Evaluator& f, const Dataset& D0, const AdapBCOptions& opt) {
  detail::require(!D0.empty(), "adap_bc: initial design must be non-empty");
  D0.validate();
  detail::validate_stop(opt.stop);
  detail::require(opt.M >= 1 && opt.K >= 1 && opt.J >= 1, "adap_bc: M, K and J must be positive");
  BCTrace trace;
  trace.data = D0;
  auto& D = trace.data;
  const ProductKernelSpec base = initial_spec(opt.model, D0);
  std::vector<double> theta_state(base.theta_size(), opt.prior_mean);
  EmbeddingCache cache(true, opt.double_rule, opt.grid_n);
  std::mt19937_64 rng(derive_seed(opt.seed, {2}));
  std::uint64_t chain_id = 0;

  auto log_post = [&](const Dataset& data) {
    return [&base, &data, &opt](std::span<const double> t) {
      for (double v : t)
        if (std::abs(v) > 50.0) return -std::numeric_limits<double>::infinity();
      try {
        return detail::log_normal_prior(t, opt.prior_mean, opt.prior_var) +
               log_marginal_likelihood(base.with_theta(t), data, opt.jitter);
      } catch (const ConditioningError&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
  };
  auto draw = [&](const Dataset& data, std::size_t count, double scale) {
    MCMCConfig cfg;
    cfg.burn_in = opt.burn_in;
    cfg.thin = opt.thin;
    cfg.steps = opt.burn_in + opt.thin * count;
    cfg.proposal_scale = scale;
    cfg.seed = derive_seed(opt.seed, {3, chain_id++});
    MCMCResult r = metropolis(log_post(data), theta_state, cfg);
    theta_state = r.last;
    return r.chain;
  };
  auto integral_law = [&](const Dataset& data, const std::vector<std::vector<double>>& thetas) {
    std::vector<double> means, vars;
    for (const auto& t : thetas) {
      const PosteriorIntegral pi = posterior_integral(condition(base.with_theta(t), data, opt.jitter), cache);
      means.push_back(pi.mu);
      vars.push_back(pi.variance());
    }
    double m = 0.0;
    for (double v : means) m += v;
    return detail::ThetaLaw{m / static_cast<double>(means.size()), total_variance_estimate(means, vars)};
  };

  for (std::size_t it = 0;; ++it) {
    if (opt.stop.budget && D.size() >= *opt.stop.budget) {
      trace.stopped_by = StopReason::Budget;
      break;
    }
    const auto t0 = detail::Clock::now();
    const double scale = opt.proposal_scale(it);
    const std::vector<Point> cands = detail::make_candidates(opt.candidates, D, it + 1, rng);
    detail::require(!cands.empty(), "adap_bc: candidate set is empty");

    // Ancestral fantasies: theta_m ~ theta | D, then f_m ~ f | theta_m, D on the candidates.
    const auto path_thetas = draw(D, opt.M, scale);
    std::vector<std::vector<double>> paths;
    for (const auto& t : path_thetas) {
      const ConditionedGP gp = condition(base.with_theta(t), D, opt.jitter);
      paths.push_back(sample_paths(gp, cands, 1, rng).front());
    }

    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (D.contains(cands[c])) continue;
      double e = 0.0;
      for (std::size_t m = 0; m < opt.M; ++m) {
        Dataset fantasy = D;
        fantasy.append(cands[c], paths[m][c]);
        e += integral_law(fantasy, draw(fantasy, opt.K, scale)).var;
      }
      e /= static_cast<double>(opt.M);
      if (e < best_v) {
        best_v = e;
        best = c;
      }
    }
    BCRecord rec;
    rec.n = D.size() + 1;
    rec.x = cands[best];
    try {
      rec.y = detail::checked_value(f, rec.x);
    } catch (const std::exception& e) {
      trace.stopped_by = StopReason::EvaluationFailure;
      trace.error = e.what();
      break;
    }
    D.append(rec.x, rec.y);
    const auto final_thetas = draw(D, opt.J, scale);
    const detail::ThetaLaw law = integral_law(D, final_thetas);
    rec.theta.assign(base.theta_size(), 0.0);
    for (const auto& t : final_thetas)
      for (std::size_t j = 0; j < t.size(); ++j) rec.theta[j] += t[j] / static_cast<double>(final_thetas.size());
    rec.mu = law.mean;
    rec.sigma = std::sqrt(std::max(0.0, law.var));
    rec.aux_seconds = detail::seconds_since(t0);
    trace.records.push_back(rec);
    trace.final = detail::make_integral(law.mean, law.var, D.size());
    trace.spec = base.with_theta(rec.theta);
    if (opt.stop.tau && rec.sigma < *opt.stop.tau) {
      trace.stopped_by = StopReason::Tolerance;
      break;
    }
  }
  if (trace.records.empty()) {
    const auto thetas = draw(D, opt.J, opt.proposal_scale(0));
    const detail::ThetaLaw law = integral_law(D, thetas);
    trace.final = detail::make_integral(law.mean, law.var, D.size());
    trace.spec = base.with_theta(theta_state);
  }
  return trace;
}

}  // namespace adacube
