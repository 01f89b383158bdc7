/**
 * @file config.hpp
 * @brief JSON experiment configuration with strict key checking.
 *
 * Every section is optional; absent keys take the defaults below. Unknown
 * keys anywhere are rejected before a run starts.
 */
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "adacube/adapt_bc.hpp"
#include "adacube/avgcase.hpp"
#include "adacube/error.hpp"
#include "adacube/synthetic.hpp"

namespace adacube {

using json = nlohmann::json;

struct IntegrandConfig {
  /// fixture | synthetic | random | external
  std::string kind = "fixture";
  std::string name = "fig1";
  SyntheticParams params;
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> command;
  bool gaussian = false;
  double timeout = 300.0;
};

struct ModelSection {
  double nu = 1.5;
  FieldKind field = FieldKind::PiecewiseLinear;
  std::size_t field_size = 11;
  double init_field_param = -1.0;
  double lambda1 = 30.0;
  double lambda2 = 1.0;
  PenaltyCombine penalty = PenaltyCombine::Product;
  std::size_t max_iter = 200;
  double grad_tol = 1e-5;
  GradientMode gradient = GradientMode::Analytic;
  /// Unset: adaptive for stdbc/eadapbc, grid sum for adapbc.
  std::optional<DoubleRule> double_rule;
  std::size_t grid_n = 101;
};

struct DesignSection {
  /// Per-axis values of the initial tensor grid; empty means the default for the dimension.
  std::vector<double> initial_axis;
  /// midpoints | grid; empty means midpoints in 1-D and grid otherwise.
  std::string candidates;
  std::vector<double> candidate_axis;
  std::size_t k_candidates = 500;
};

struct TrapSection {
  double rho = 0.5;
  unsigned m = 5;
  unsigned k = 2;
  unsigned max_depth = 40;
  bool memoise = false;
  std::vector<double> taus{0.06, 0.04, 0.02};
};

struct McmcSection {
  std::size_t M = 8, K = 8, J = 50;
  std::size_t burn_in = 1000, thin = 5;
  double scale0 = 0.3, scale_slope = 0.007, scale_floor = 0.01;
  double prior_mean = -1.0, prior_var = 2.0;
};

struct SynthSection {
  std::size_t dim = 1;
  std::size_t n_integrands = 20;
  std::size_t budget = 50;
  std::vector<std::string> methods{"stdbc", "eadapbc"};
};

struct AvgcaseSection {
  double rho = 0.35355339059327379;
  unsigned m = 5;
  unsigned k = 2;
  double lambda = 1.0;
  double gamma = 1.0;
  std::size_t reps = 100000;
  unsigned max_depth = 25;
  double tau = 0.02;
  std::vector<double> taus{0.02, 0.05, 0.1};
  unsigned enum_depth = 4;
};

struct HoldoutSection {
  std::size_t m = 0;
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  std::string method = "eadapbc";
  std::uint64_t seed = 0;
  IntegrandConfig integrand;
  ModelSection model;
  DesignSection design;
  StopRule stop;
  TrapSection adaptrap;
  McmcSection mcmc;
  SynthSection synth;
  AvgcaseSection avgcase;
  HoldoutSection holdout;
  std::size_t plot_points = 512;
  /// Canonical form of the parsed input (sorted keys).
  json source = json::object();
};

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double num(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }

  std::uint64_t uint(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(where(key) + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be a boolean");
    return v.get<bool>();
  }

  std::string str(const std::string& key, const std::string& def, const std::set<std::string>& choices = {}) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    std::string s = v.get<std::string>();
    if (!choices.empty() && !choices.count(s)) throw ConfigError(where(key) + " has unsupported value '" + s + "'");
    return s;
  }

  std::vector<double> nums(const std::string& key, const std::vector<double>& def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> strs(const std::string& key, const std::vector<std::string>& def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(where(key) + " must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  /// Reject keys that were never asked for.
  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key " + where(k));
  }

 private:
  std::string where(const std::string& key = "") const {
    std::string p = path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
    return p.empty() ? "config" : "'" + p + "'";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline SyntheticParams read_params(const json& j, const std::string& path) {
  Reader r(j, path);
  SyntheticParams p;
  p.C = r.nums("C", {});
  p.R = r.nums("R", {});
  p.H = r.nums("H", {});
  p.F = r.nums("F", {});
  for (double v : r.nums("P", {})) p.P.push_back(static_cast<int>(v));
  r.num("d", 0.0);
  r.uint("seed", 0);
  r.done();
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
  return p;
}

}  // namespace detail

inline json params_to_json(const SyntheticParams& p) {
  return json{{"C", p.C}, {"R", p.R}, {"H", p.H}, {"F", p.F}, {"P", p.P}, {"d", p.dim()}};
}

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  detail::Reader top(j, "");
  c.method = top.str("method", c.method, {"adaptrap", "stdbc", "eadapbc", "adapbc"});
  c.seed = top.uint("seed", c.seed);
  c.plot_points = top.uint("plot_points", c.plot_points);

  if (top.has("integrand")) {
    detail::Reader r(top.at("integrand"), "integrand");
    auto& ic = c.integrand;
    ic.kind = r.str("kind", ic.kind, {"fixture", "synthetic", "random", "external"});
    ic.name = r.str("name", ic.name);
    if (r.has("params")) ic.params = detail::read_params(r.at("params"), "integrand.params");
    ic.dim = r.uint("dim", ic.dim);
    ic.seed = r.uint("seed", ic.seed);
    ic.command = r.strs("command", ic.command);
    ic.gaussian = r.boolean("gaussian", ic.gaussian);
    ic.timeout = r.num("timeout", ic.timeout);
    r.done();
    if (ic.kind == "fixture") {
      try {
        fixture_params(ic.name);
      } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
      }
    }
    if (ic.kind == "synthetic" && ic.params.C.empty()) throw ConfigError("'integrand.params' is required for kind synthetic");
    if (ic.kind == "external" && ic.command.empty()) throw ConfigError("'integrand.command' is required for kind external");
    if (ic.dim < 1) throw ConfigError("'integrand.dim' must be at least 1");
  }

  if (top.has("model")) {
    detail::Reader r(top.at("model"), "model");
    auto& m = c.model;
    m.nu = r.num("nu", m.nu);
    if (m.nu != 0.5 && m.nu != 1.5 && m.nu != 2.5) throw ConfigError("'model.nu' must be 0.5, 1.5 or 2.5");
    m.field = field_kind_from_string(
        r.str("field", to_string(m.field), {"piecewise_linear", "piecewise_constant", "exp_piecewise_linear", "constant"}));
    m.field_size = r.uint("field_size", m.field_size);
    m.init_field_param = r.num("init_field_param", m.init_field_param);
    m.lambda1 = r.num("lambda1", m.lambda1);
    m.lambda2 = r.num("lambda2", m.lambda2);
    m.penalty = r.str("penalty", "product", {"product", "sum"}) == "sum" ? PenaltyCombine::Sum : PenaltyCombine::Product;
    m.max_iter = r.uint("max_iter", m.max_iter);
    m.grad_tol = r.num("grad_tol", m.grad_tol);
    m.gradient = r.str("gradient", "analytic", {"analytic", "finite_difference"}) == "analytic"
                     ? GradientMode::Analytic
                     : GradientMode::FiniteDifference;
    if (r.has("double_rule"))
      m.double_rule = r.str("double_rule", "", {"adaptive", "grid_sum"}) == "adaptive" ? DoubleRule::Adaptive
                                                                                      : DoubleRule::GridSum;
    m.grid_n = r.uint("grid_n", m.grid_n);
    r.done();
    if (m.lambda1 < 0.0 || m.lambda2 < 0.0) throw ConfigError("'model.lambda1/lambda2' must be nonnegative");
    if (m.field_size < 2 && m.field != FieldKind::Constant) throw ConfigError("'model.field_size' must be at least 2");
  }

  if (top.has("design")) {
    detail::Reader r(top.at("design"), "design");
    auto& d = c.design;
    d.initial_axis = r.nums("initial_axis", d.initial_axis);
    d.candidates = r.str("candidates", d.candidates, {"midpoints", "grid"});
    d.candidate_axis = r.nums("candidate_axis", d.candidate_axis);
    d.k_candidates = r.uint("k_candidates", d.k_candidates);
    r.done();
  }

  if (top.has("stop")) {
    detail::Reader r(top.at("stop"), "stop");
    if (r.has("budget")) c.stop.budget = r.uint("budget", 0);
    if (r.has("tau")) c.stop.tau = r.num("tau", 0.0);
    r.done();
  }

  if (top.has("adaptrap")) {
    detail::Reader r(top.at("adaptrap"), "adaptrap");
    auto& t = c.adaptrap;
    t.rho = r.num("rho", t.rho);
    t.m = static_cast<unsigned>(r.uint("m", t.m));
    t.k = static_cast<unsigned>(r.uint("k", t.k));
    t.max_depth = static_cast<unsigned>(r.uint("max_depth", t.max_depth));
    t.memoise = r.boolean("memoise", t.memoise);
    t.taus = r.nums("taus", t.taus);
    r.done();
  }

  if (top.has("mcmc")) {
    detail::Reader r(top.at("mcmc"), "mcmc");
    auto& m = c.mcmc;
    m.M = r.uint("M", m.M);
    m.K = r.uint("K", m.K);
    m.J = r.uint("J", m.J);
    m.burn_in = r.uint("burn_in", m.burn_in);
    m.thin = r.uint("thin", m.thin);
    m.scale0 = r.num("scale0", m.scale0);
    m.scale_slope = r.num("scale_slope", m.scale_slope);
    m.scale_floor = r.num("scale_floor", m.scale_floor);
    m.prior_mean = r.num("prior_mean", m.prior_mean);
    m.prior_var = r.num("prior_var", m.prior_var);
    r.done();
  }

  if (top.has("synth")) {
    detail::Reader r(top.at("synth"), "synth");
    auto& s = c.synth;
    s.dim = r.uint("dim", s.dim);
    s.n_integrands = r.uint("n_integrands", s.n_integrands);
    s.budget = r.uint("budget", s.budget);
    s.methods = r.strs("methods", s.methods);
    for (const auto& m : s.methods)
      if (m != "stdbc" && m != "eadapbc") throw ConfigError("'synth.methods' entries must be stdbc or eadapbc");
    r.done();
  }

  if (top.has("avgcase")) {
    detail::Reader r(top.at("avgcase"), "avgcase");
    auto& a = c.avgcase;
    a.rho = r.num("rho", a.rho);
    a.m = static_cast<unsigned>(r.uint("m", a.m));
    a.k = static_cast<unsigned>(r.uint("k", a.k));
    a.lambda = r.num("lambda", a.lambda);
    a.gamma = r.num("gamma", a.gamma);
    a.reps = r.uint("reps", a.reps);
    a.max_depth = static_cast<unsigned>(r.uint("max_depth", a.max_depth));
    a.tau = r.num("tau", a.tau);
    a.taus = r.nums("taus", a.taus);
    a.enum_depth = static_cast<unsigned>(r.uint("enum_depth", a.enum_depth));
    r.done();
  }

  if (top.has("holdout")) {
    detail::Reader r(top.at("holdout"), "holdout");
    c.holdout.m = r.uint("m", c.holdout.m);
    c.holdout.seed = r.uint("seed", c.holdout.seed);
    r.done();
  }
  top.done();
  c.source = j;
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// FNV-1a of the canonical JSON text.
inline std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace adacube
