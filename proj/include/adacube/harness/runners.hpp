/**
 * @file runners.hpp
 * @brief Experiment runners behind the CLI.
 *
 * Every runner returns its output files as strings. Files depend only on the
 * configuration (including seeds); wall-clock timing goes to the log and to
 * RunOutput::seconds, never into a file.
 */
#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "adacube/adapt_bc.hpp"
#include "adacube/avgcase.hpp"
#include "adacube/harness/config.hpp"
#include "adacube/harness/csv.hpp"
#include "adacube/harness/external.hpp"
#include "adacube/harness/log.hpp"
#include "adacube/harness/reparam.hpp"
#include "adacube/rng.hpp"
#include "adacube/synthetic.hpp"
#include "adacube/trapz.hpp"

namespace adacube {

inline constexpr double kZ95 = 1.959963984540054;

struct RunOutput {
  /// File name -> contents.
  std::map<std::string, std::string> files;
  json summary = json::object();
  double seconds = 0.0;

  /// Writes every file plus summary.json into dir.
  void write(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
      std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
      if (!out) throw ConfigError("cannot write " + name + " in " + dir);
      out << text;
    };
    for (const auto& [name, text] : files) put(name, text);
    put("summary.json", summary.dump(2) + "\n");
  }
};

/// Evaluator built from an IntegrandConfig. raw is the function before Gaussian reparametrization.
struct Integrand {
  Evaluator f;
  Evaluator raw;
  std::size_t dim = 1;
  bool gaussian = false;
  std::optional<double> reference;
  std::optional<SyntheticParams> params;
  std::shared_ptr<ExternalIntegrand> external;
};

inline Integrand make_integrand(const IntegrandConfig& ic) {
  Integrand out;
  out.gaussian = ic.gaussian;
  if (ic.kind == "external") {
    ExternalIntegrand::Options eo;
    eo.timeout_seconds = ic.timeout;
    out.external = std::make_shared<ExternalIntegrand>(ic.command, eo);
    out.raw = [ext = out.external](std::span<const double> x) { return (*ext)(x); };
    out.dim = ic.dim;
  } else {
    SyntheticParams p;
    if (ic.kind == "fixture") {
      p = fixture_params(ic.name);
    } else if (ic.kind == "synthetic") {
      p = ic.params;
    } else {
      std::mt19937_64 rng(ic.seed);
      p = sample_params(ic.dim, rng);
    }
    p.validate();
    out.params = p;
    out.dim = p.dim();
    out.raw = [p](std::span<const double> x) { return eval_integrand(p, x); };
    if (!ic.gaussian) out.reference = reference_integral(p);
  }
  out.f = ic.gaussian ? gaussian_reparam(out.raw) : out.raw;
  return out;
}

namespace detail {

inline std::string num(double v) { return std::isfinite(v) ? format_double(v) : ""; }

inline json num_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

inline std::vector<double> default_initial_axis(std::size_t d) {
  if (d == 1) {
    std::vector<double> a;
    for (int i = 0; i <= 10; ++i) a.push_back(i / 10.0);
    return a;
  }
  return {0.2, 0.4, 0.6, 0.8};
}

inline std::vector<double> default_candidate_axis() {
  std::vector<double> a;
  for (int i = 1; i < 40; ++i) a.push_back(i / 40.0);
  return a;
}

inline Dataset initial_design(const ExperimentConfig& c, const Evaluator& f, std::size_t d) {
  const std::vector<double> axis = c.design.initial_axis.empty() ? default_initial_axis(d) : c.design.initial_axis;
  Dataset D;
  for (const Point& x : tensor_grid(std::vector<std::vector<double>>(d, axis))) D.append(x, f(x));
  return D;
}

inline CandidateRule candidate_rule(const ExperimentConfig& c, std::size_t d) {
  CandidateRule r;
  const std::string kind = c.design.candidates.empty() ? (d == 1 ? "midpoints" : "grid") : c.design.candidates;
  if (kind == "midpoints") {
    if (d != 1) throw ConfigError("midpoint candidates need a one-dimensional integrand");
    return r;
  }
  r.kind = CandidateKind::Grid;
  const std::vector<double> axis = c.design.candidate_axis.empty() ? default_candidate_axis() : c.design.candidate_axis;
  r.axes.assign(d, axis);
  r.K = c.design.k_candidates;
  return r;
}

inline StopRule effective_stop(const ExperimentConfig& c) {
  StopRule s = c.stop;
  if (!s.tau && !s.budget) s.budget = 50;
  return s;
}

inline ModelConfig model_config(const ModelSection& m) {
  ModelConfig mc;
  mc.rbf = RadialBasis::matern(m.nu);
  mc.field = m.field;
  mc.field_size = m.field_size;
  mc.init_field_param = m.init_field_param;
  return mc;
}

inline BCOptions bc_options(const ExperimentConfig& c, std::size_t d, const std::string& method) {
  BCOptions o;
  o.stop = effective_stop(c);
  o.model = model_config(c.model);
  o.reg = method == "stdbc" ? stdbc_regularizer(d) : Regularizer{c.model.lambda1, c.model.lambda2, c.model.penalty};
  o.fit.max_iter = c.model.max_iter;
  o.fit.grad_tol = c.model.grad_tol;
  o.fit.gradient = c.model.gradient;
  o.candidates = candidate_rule(c, d);
  o.double_rule = c.model.double_rule.value_or(DoubleRule::Adaptive);
  o.grid_n = c.model.grid_n;
  o.seed = c.seed;
  return o;
}

inline AdapBCOptions adapbc_options(const ExperimentConfig& c, std::size_t d) {
  AdapBCOptions o;
  o.stop = effective_stop(c);
  o.model = model_config(c.model);
  o.candidates = candidate_rule(c, d);
  o.prior_mean = c.mcmc.prior_mean;
  o.prior_var = c.mcmc.prior_var;
  o.M = c.mcmc.M;
  o.K = c.mcmc.K;
  o.J = c.mcmc.J;
  o.burn_in = c.mcmc.burn_in;
  o.thin = c.mcmc.thin;
  o.scale0 = c.mcmc.scale0;
  o.scale_slope = c.mcmc.scale_slope;
  o.scale_floor = c.mcmc.scale_floor;
  o.double_rule = c.model.double_rule.value_or(DoubleRule::GridSum);
  o.grid_n = c.model.grid_n;
  o.seed = c.seed;
  return o;
}

inline BCTrace run_method(const std::string& method, const Evaluator& f, const Dataset& D0, const ExperimentConfig& c,
                          std::size_t d) {
  if (method == "stdbc") return std_bc(f, D0, bc_options(c, d, method));
  if (method == "eadapbc") return e_adap_bc(f, D0, bc_options(c, d, method));
  if (method == "adapbc") return adap_bc(f, D0, adapbc_options(c, d));
  throw ConfigError("unknown method " + method);
}

inline std::vector<std::string> point_header(const std::string& prefix, std::size_t d) {
  std::vector<std::string> h;
  for (std::size_t i = 1; i <= d; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

/// Trace CSV: one row per acquisition; z_score only when the reference is known.
inline std::string trace_csv(const BCTrace& t, std::size_t d, std::optional<double> reference) {
  std::vector<std::string> header{"n"};
  for (const auto& h : point_header("x", d)) header.push_back(h);
  for (const char* h : {"y", "mu", "sigma", "z_score"}) header.push_back(h);
  const std::size_t nt = t.records.empty() ? 0 : t.records.front().theta.size();
  for (const auto& h : point_header("theta", nt)) header.push_back(h);
  CsvTable csv(header);
  for (const auto& r : t.records) {
    std::vector<std::string> row{std::to_string(r.n)};
    for (double v : r.x) row.push_back(num(v));
    row.push_back(num(r.y));
    row.push_back(num(r.mu));
    row.push_back(num(r.sigma));
    row.push_back(reference && r.sigma > 0.0 ? num((r.mu - *reference) / r.sigma) : "");
    for (double v : r.theta) row.push_back(num(v));
    row.resize(header.size());
    csv.row(row);
  }
  return csv.str();
}

inline std::string design_csv(const Dataset& D, std::size_t n0) {
  std::vector<std::string> header{"index", "stage"};
  for (const auto& h : point_header("x", D.dim())) header.push_back(h);
  header.push_back("y");
  CsvTable csv(header);
  for (std::size_t i = 0; i < D.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), i < n0 ? "initial" : "acquired"};
    for (double v : D.X[i]) row.push_back(num(v));
    row.push_back(num(D.y[i]));
    csv.row(row);
  }
  return csv.str();
}

inline json trace_summary(const BCTrace& t, std::optional<double> reference) {
  json s;
  s["n"] = t.data.size();
  s["acquisitions"] = t.records.size();
  s["mu"] = num_or_null(t.final.mu);
  s["sigma"] = num_or_null(t.final.sigma);
  s["variance"] = num_or_null(t.final.variance());
  s["stopped_by"] = to_string(t.stopped_by);
  s["error_message"] = t.error;
  s["theta"] = t.spec.theta();
  s["reference"] = num_or_null(reference);
  if (reference) {
    s["error"] = std::abs(t.final.mu - *reference);
    s["relative_error"] = num_or_null(*reference != 0.0 ? std::abs((t.final.mu - *reference) / *reference) : NAN);
    s["z_score"] = num_or_null(t.final.sigma > 0.0 ? (t.final.mu - *reference) / t.final.sigma : NAN);
  } else {
    s["error"] = nullptr;
    s["relative_error"] = nullptr;
    s["z_score"] = nullptr;
  }
  return s;
}

/// Posterior mean and 95% pointwise band on an equispaced 1-D grid.
inline std::string curve_csv(const ConditionedGP& gp, const Evaluator& truth, std::size_t points) {
  CsvTable csv({"x", "truth", "mean", "lower", "upper"});
  for (std::size_t j = 0; j < points; ++j) {
    const double x = points == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(points - 1);
    const Point p{x};
    const double m = gp.mean(p);
    const double s = std::sqrt(std::max(0.0, gp.variance(p)));
    csv.row({num(x), num(truth(p)), num(m), num(m - kZ95 * s), num(m + kZ95 * s)});
  }
  return csv.str();
}

/// Holdout for mse_bound: N(0, I) mapped through Phi when gaussian, else uniform on the cube.
inline MseBound holdout_bound(const ConditionedGP& gp, const Integrand& in, const HoldoutSection& h) {
  std::mt19937_64 rng(h.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Point> pts;
  std::vector<double> vals;
  for (std::size_t i = 0; i < h.m; ++i) {
    Point x(in.dim), u(in.dim);
    for (std::size_t j = 0; j < in.dim; ++j) {
      if (in.gaussian) {
        x[j] = normal(rng);
        u[j] = normal_cdf(x[j]);
      } else {
        u[j] = x[j] = unif(rng);
      }
    }
    vals.push_back(in.raw(x));
    pts.push_back(u);
  }
  return mse_bound(gp, pts, vals);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

inline TrapConfig trap_config(const TrapSection& t) {
  TrapConfig c;
  c.rho = t.rho;
  c.m = t.m;
  c.k = t.k;
  c.max_depth = t.max_depth;
  c.memoise = t.memoise;
  return c;
}

/// AdapTrap at each tau: a results table and the distinct evaluation points.
inline void adaptrap_tables(const Integrand& in, const TrapSection& ts, RunOutput& out, const std::string& prefix) {
  if (in.dim != 1) throw ConfigError("adaptrap needs a one-dimensional integrand");
  const TrapConfig cfg = trap_config(ts);
  auto f1 = [&](double x) { return in.f(std::span<const double>(&x, 1)); };
  CsvTable res({"tau", "estimate", "reference", "error", "error_below_tau", "n_evals", "distinct_evals", "terminated",
                "tree_size", "height"});
  CsvTable pts({"tau", "x", "y"});
  json rows = json::array();
  for (double tau : ts.taus) {
    const AdapTrapResult r = adap_trap(f1, 0.0, 1.0, tau, cfg);
    const auto ev = distinct_evaluations(r);
    const double err = in.reference ? std::abs(r.estimate - *in.reference) : NAN;
    const std::string below = in.reference ? (err < tau ? "true" : "false") : "";
    res.row({num(tau), num(r.estimate), in.reference ? num(*in.reference) : "", num(err), below,
             std::to_string(r.n_evals), std::to_string(ev.size()), r.terminated ? "true" : "false",
             std::to_string(r.tree.size()), std::to_string(r.tree.height())});
    for (const auto& [x, y] : ev) pts.row({num(tau), num(x), num(y)});
    json j;
    j["tau"] = tau;
    j["estimate"] = num_or_null(r.estimate);
    j["error"] = num_or_null(err);
    j["error_below_tau"] = in.reference ? json(err < tau) : json(nullptr);
    j["n_evals"] = r.n_evals;
    j["distinct_evals"] = ev.size();
    j["terminated"] = r.terminated;
    rows.push_back(j);
  }
  out.files[prefix + ".csv"] = res.str();
  out.files[prefix + "_points.csv"] = pts.str();
  out.summary[prefix] = rows;
}

inline json header_summary(const ExperimentConfig& c, const std::string& command) {
  json s;
  s["command"] = command;
  s["config_hash"] = config_hash(c.source);
  s["seed"] = c.seed;
  return s;
}

}  // namespace detail

/// AdapTrap on a one-dimensional integrand at every configured tolerance.
inline RunOutput run_adaptrap(const ExperimentConfig& c) {
  detail::Timer timer;
  RunOutput out;
  out.summary = detail::header_summary(c, "adaptrap");
  const Integrand in = make_integrand(c.integrand);
  out.summary["reference"] = detail::num_or_null(in.reference);
  detail::adaptrap_tables(in, c.adaptrap, out, "adaptrap");
  out.seconds = timer.seconds();
  log::info("adaptrap finished in " + std::to_string(out.seconds) + " s");
  return out;
}

/// One Bayesian cubature run (method from the config) with trace, design and optional holdout bound.
inline RunOutput run_bc(const ExperimentConfig& c) {
  detail::Timer timer;
  RunOutput out;
  out.summary = detail::header_summary(c, "bc");
  if (c.method == "adaptrap") throw ConfigError("bc needs method stdbc, eadapbc or adapbc");
  const Integrand in = make_integrand(c.integrand);
  const Dataset D0 = detail::initial_design(c, in.f, in.dim);
  const BCTrace t = detail::run_method(c.method, in.f, D0, c, in.dim);
  out.files["trace.csv"] = detail::trace_csv(t, in.dim, in.reference);
  out.files["design.csv"] = detail::design_csv(t.data, D0.size());
  json s = detail::trace_summary(t, in.reference);
  s["method"] = c.method;
  s["dim"] = in.dim;
  s["initial_size"] = D0.size();
  if (in.params) s["params"] = params_to_json(*in.params);
  if (c.holdout.m > 0) {
    const MseBound b = detail::holdout_bound(condition(t.spec, t.data), in, c.holdout);
    s["mse_bound"] = json{{"value", b.value}, {"se", b.se}, {"m", c.holdout.m}};
  }
  if (in.external) s["external_round_trips"] = in.external->round_trips();
  out.summary.update(s);
  out.seconds = timer.seconds();
  log::info("bc " + c.method + " finished in " + std::to_string(out.seconds) + " s");
  return out;
}

/**
 * AdapTrap, StdBC and E-AdapBC on one 1-D integrand (the fig1 fixture by
 * default). Emits traces, posterior curves with 95% bands on plot_points
 * abscissae, and the bump-region evaluation density ratio of E-AdapBC.
 */
inline RunOutput run_illustration(const ExperimentConfig& c) {
  detail::Timer timer;
  RunOutput out;
  out.summary = detail::header_summary(c, "illustrate");
  const Integrand in = make_integrand(c.integrand);
  if (in.dim != 1) throw ConfigError("illustrate needs a one-dimensional integrand");
  out.summary["reference"] = detail::num_or_null(in.reference);
  detail::adaptrap_tables(in, c.adaptrap, out, "adaptrap");
  const Dataset D0 = detail::initial_design(c, in.f, 1);
  for (const std::string method : {"stdbc", "eadapbc"}) {
    const BCTrace t = detail::run_method(method, in.f, D0, c, 1);
    out.files[method + "_trace.csv"] = detail::trace_csv(t, 1, in.reference);
    out.files[method + "_design.csv"] = detail::design_csv(t.data, D0.size());
    out.files[method + "_curve.csv"] = detail::curve_csv(condition(t.spec, t.data), in.f, c.plot_points);
    json s = detail::trace_summary(t, in.reference);
    if (in.params) {
      const double lo = std::max(0.0, in.params->C[0] - in.params->R[0]);
      const double hi = std::min(1.0, in.params->C[0] + in.params->R[0]);
      std::size_t inside = 0;
      for (const Point& x : t.data.X) inside += (x[0] >= lo && x[0] <= hi);
      const double outside = static_cast<double>(t.data.size() - inside);
      const double ratio = hi - lo < 1.0 ? (static_cast<double>(inside) / (hi - lo)) / (outside / (1.0 - (hi - lo))) : NAN;
      s["bump_region"] = {lo, hi};
      s["bump_points"] = inside;
      s["bump_density_ratio"] = detail::num_or_null(ratio);
    }
    out.summary[method] = s;
  }
  out.seconds = timer.seconds();
  log::info("illustrate finished in " + std::to_string(out.seconds) + " s");
  return out;
}

/**
 * Ensemble of random synthetic integrands. Integrand i uses
 * sample_params(d, derive_seed(seed, {i})); method j runs with seed
 * derive_seed(seed, {i, j + 1}). Rows of synth.csv are per (method, n).
 */
inline RunOutput run_synthetic_assessment(const ExperimentConfig& c) {
  detail::Timer timer;
  RunOutput out;
  out.summary = detail::header_summary(c, "synth-bench");
  const auto& s = c.synth;
  if (s.n_integrands < 1) throw ConfigError("'synth.n_integrands' must be at least 1");
  ExperimentConfig run = c;
  run.stop = StopRule{};
  run.stop.budget = s.budget;

  CsvTable runs({"integrand", "method", "n", "mu", "sigma", "reference", "rel_err", "covered"});
  // rel_err[method][n] and covered[method][n] across integrands
  std::map<std::string, std::map<std::size_t, std::vector<double>>> rel, cov;
  json integrands = json::array();
  for (std::size_t i = 0; i < s.n_integrands; ++i) {
    std::mt19937_64 rng(derive_seed(c.seed, {i}));
    const SyntheticParams p = sample_params(s.dim, rng);
    const double I = reference_integral(p);
    const Evaluator f = [p](std::span<const double> x) { return eval_integrand(p, x); };
    json pj = params_to_json(p);
    pj["reference"] = I;
    integrands.push_back(pj);
    const Dataset D0 = detail::initial_design(c, f, s.dim);
    for (std::size_t j = 0; j < s.methods.size(); ++j) {
      const std::string& method = s.methods[j];
      run.seed = derive_seed(c.seed, {i, j + 1});
      const BCTrace t = detail::run_method(method, f, D0, run, s.dim);
      for (const auto& r : t.records) {
        const double re = std::abs((r.mu - I) / I);
        const bool in95 = std::abs(r.mu - I) <= kZ95 * r.sigma;
        rel[method][r.n].push_back(re);
        cov[method][r.n].push_back(in95 ? 1.0 : 0.0);
        runs.row({std::to_string(i), method, std::to_string(r.n), detail::num(r.mu), detail::num(r.sigma),
                  detail::num(I), detail::num(re), in95 ? "1" : "0"});
      }
      log::info("synth integrand " + std::to_string(i) + " " + method + " done");
    }
  }

  auto mean_se = [](const std::vector<double>& v) {
    const double m = static_cast<double>(v.size());
    double mean = 0.0, ss = 0.0;
    for (double x : v) mean += x;
    mean /= m;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = v.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
    return std::pair{mean, se};
  };
  CsvTable table({"method", "n", "mean_rel_err", "se", "coverage", "coverage_se"});
  json finals = json::object();
  for (const std::string& method : s.methods) {
    std::vector<double> ns, errs;
    for (const auto& [n, v] : rel[method]) {
      const auto [me, mse] = mean_se(v);
      const auto [mc, mcs] = mean_se(cov[method][n]);
      table.row({method, std::to_string(n), detail::num(me), detail::num(mse), detail::num(mc), detail::num(mcs)});
      ns.push_back(static_cast<double>(n));
      errs.push_back(me);
      finals[method] = json{{"n", n},         {"mean_rel_err", me}, {"se", mse},
                            {"coverage", mc}, {"coverage_se", mcs}, {"integrands", v.size()}};
    }
    // least-squares slope of the mean relative error against n
    double slope = NAN;
    if (ns.size() > 1) {
      double mx = 0.0, my = 0.0;
      for (std::size_t k = 0; k < ns.size(); ++k) mx += ns[k], my += errs[k];
      mx /= static_cast<double>(ns.size());
      my /= static_cast<double>(ns.size());
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t k = 0; k < ns.size(); ++k) sxy += (ns[k] - mx) * (errs[k] - my), sxx += (ns[k] - mx) * (ns[k] - mx);
      slope = sxy / sxx;
    }
    finals[method]["trend_slope"] = detail::num_or_null(slope);
  }
  out.files["synth.csv"] = table.str();
  out.files["synth_runs.csv"] = runs.str();
  out.files["synth_integrands.json"] = integrands.dump(2) + "\n";
  out.summary["dim"] = s.dim;
  out.summary["budget"] = s.budget;
  out.summary["n_integrands"] = s.n_integrands;
  out.summary["final"] = finals;
  out.seconds = timer.seconds();
  log::info("synth-bench finished in " + std::to_string(out.seconds) + " s");
  return out;
}

/**
 * Monte Carlo checks of the AdapTrap average-case laws under a Wiener prior.
 * One study per tau in avgcase.taus (seed derive_seed(seed, {index})); the
 * study at avgcase.tau also supplies the tree-law checks.
 */
inline RunOutput run_avgcase_validation(const ExperimentConfig& c) {
  detail::Timer timer;
  RunOutput out;
  out.summary = detail::header_summary(c, "avgcase");
  const auto& a = c.avgcase;
  TrapStudyParams p;
  p.rho = a.rho;
  p.m = a.m;
  p.k = a.k;
  p.prior.lambda = a.lambda;
  p.prior.gamma = a.gamma;
  json checks = json::array();
  auto check = [&](const std::string& name, double estimate, double theory, double se, double tolerance, bool pass) {
    checks.push_back(json{{"name", name},
                          {"estimate", detail::num_or_null(estimate)},
                          {"theory", detail::num_or_null(theory)},
                          {"se", detail::num_or_null(se)},
                          {"tolerance", detail::num_or_null(tolerance)},
                          {"pass", pass}});
  };

  std::vector<double> taus = a.taus;
  if (std::find(taus.begin(), taus.end(), a.tau) == taus.end()) taus.insert(taus.begin(), a.tau);
  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    p.tau = taus[ti];
    StudyOptions so;
    so.seed = derive_seed(c.seed, {ti});
    const StudyResult r = mc_adaptrap_study(p, a.reps, a.max_depth, so);
    const double N = static_cast<double>(r.reps);
    char label[48];
    std::snprintf(label, sizeof label, "[tau=%g]", p.tau);
    const std::string t = label;

    const double bound = prop1_lower_bound(p.tau, p.m, p.prior);
    const double pe = r.p_exceed();
    check("exceedance_above_lower_bound" + t, pe, bound, std::sqrt(pe * (1.0 - pe) / N), 0.0, pe > bound);
    checks.back()["rao_blackwell_estimate"] = r.p_exceed_conditional();
    if (p.tau != a.tau) continue;

    const double alpha = alpha_i(0, p);
    const double ps = r.single_node_rate();
    const double se_s = std::sqrt(alpha * (1.0 - alpha) / N);
    check("single_node_frequency" + t, ps, alpha, se_s, 3.0 * se_s, std::abs(ps - alpha) <= 3.0 * se_s);

    if (p.k == 2) {
      const double nonterm = nontermination_prob_k2(alpha);
      const double cut = r.cutoff_rate();
      const double se_c = std::sqrt(std::max(nonterm * (1.0 - nonterm), 1e-300) / N);
      // terminating trees taller than max_depth are also cut off
      const double residual = std::max(0.0, (1.0 - nonterm) - prob_height_at_most(a.max_depth, p));
      check("cutoff_rate" + t, cut, nonterm, se_c, 3.0 * se_c + residual, std::abs(cut - nonterm) <= 3.0 * se_c + residual);
      checks.back()["residual"] = residual;
    }

    const auto& e = r.single_node_errors;
    if (e.size() > 1) {
      const double w = p.prior.b - p.prior.a;
      const double theory = p.prior.lambda * w * w * w / (48.0 * p.m * p.m);
      double m2 = 0.0, m4 = 0.0;
      for (double x : e) m2 += x * x, m4 += x * x * x * x;
      const double ne = static_cast<double>(e.size());
      m2 /= ne;
      m4 /= ne;
      const double se_v = std::sqrt(std::max(0.0, m4 - m2 * m2) / ne);
      check("single_node_error_variance" + t, m2, theory, se_v, 4.0 * se_v, std::abs(m2 - theory) <= 4.0 * se_v);
    }
    out.summary["study"] = json{{"tau", p.tau},
                                {"reps", r.reps},
                                {"cutoffs", r.cutoffs},
                                {"single_node", r.single_node},
                                {"exceed", r.exceed},
                                {"max_depth", a.max_depth}};
  }

  // exact enumeration checks
  {
    bool ok = true;
    for (unsigned k : {2u, 3u})
      for (unsigned n = 0; n <= 6; ++n) ok = ok && BigInt(enumerate_full_trees(n, k).size()) == catalan_k(n, k);
    check("catalan_matches_enumeration", NAN, NAN, NAN, 0.0, ok);
  }
  if (p.k == 2) {
    p.tau = a.tau;
    double total = 0.0;
    for (const std::string& s : enumerate_trees_by_height(a.enum_depth, p.k))
      total += tree_probability(FullKAryTree::deserialize(s, p.k), p);
    const double residual = 1.0 - prob_height_at_most(a.enum_depth, p);
    const double sum = total + residual;
    check("tree_probabilities_sum_to_one", sum, 1.0, NAN, 1e-12, std::abs(sum - 1.0) <= 1e-12);
  }
  out.summary["checks"] = checks;
  bool all = true;
  for (const auto& ch : checks) all = all && ch["pass"].get<bool>();
  out.summary["all_pass"] = all;
  out.files["avgcase.json"] = checks.dump(2) + "\n";
  out.seconds = timer.seconds();
  log::info("avgcase finished in " + std::to_string(out.seconds) + " s");
  return out;
}

}  // namespace adacube
