/**
 * @file synthetic.hpp
 * @brief Random test integrands on [0,1]^d built from a bump and a smoothed step
 *        per coordinate, with reference integrals.
 *
 * f(x) = prod_i [ H_i g_{F_i}((x_i - C_i)/R_i) + (-1)^{P_i} (1/2 - h(x_i - C_i)) ],
 * g_F(z) = exp(-1/(1 - z^2) + cos(F pi |z|)) for |z| < 1 and 0 otherwise,
 * h(x) = 1 / (1 + exp(-80 x)).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "adacube/error.hpp"
#include "adacube/quadrature.hpp"

namespace adacube {

struct SyntheticParams {
  std::vector<double> C, R, H, F;
  std::vector<int> P;

  std::size_t dim() const { return C.size(); }

  void validate() const {
    const std::size_t d = C.size();
    detail::require(d >= 1, "SyntheticParams: need at least one dimension");
    detail::require(R.size() == d && H.size() == d && F.size() == d && P.size() == d,
                    "SyntheticParams: component lengths differ");
    for (std::size_t i = 0; i < d; ++i) {
      detail::require(R[i] > 0.0, "SyntheticParams: R must be positive");
      detail::require(P[i] == 0 || P[i] == 1, "SyntheticParams: P must be 0 or 1");
    }
  }

  bool operator==(const SyntheticParams&) const = default;
};

/// C ~ U(0.1,0.9), R ~ Beta(5,2), H ~ U(e/2, 3e/2), F ~ U(0,5), P ~ Bernoulli(1/2), per coordinate.
template <class Rng>
SyntheticParams sample_params(std::size_t d, Rng& rng) {
  detail::require(d >= 1, "sample_params: d must be at least 1");
  SyntheticParams p;
  std::uniform_real_distribution<double> uc(0.1, 0.9), uh(0.5 * std::numbers::e, 1.5 * std::numbers::e), uf(0.0, 5.0);
  std::gamma_distribution<double> g5(5.0, 1.0), g2(2.0, 1.0);
  std::bernoulli_distribution bern(0.5);
  for (std::size_t i = 0; i < d; ++i) p.C.push_back(uc(rng));
  for (std::size_t i = 0; i < d; ++i) {
    const double a = g5(rng), b = g2(rng);
    p.R.push_back(a / (a + b));
  }
  for (std::size_t i = 0; i < d; ++i) p.H.push_back(uh(rng));
  for (std::size_t i = 0; i < d; ++i) p.F.push_back(uf(rng));
  for (std::size_t i = 0; i < d; ++i) p.P.push_back(bern(rng) ? 1 : 0);
  return p;
}

inline double synthetic_bump(double z, double F) {
  const double az = std::abs(z);
  if (!(az < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - z * z) + std::cos(F * std::numbers::pi * az));
}

inline double synthetic_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-80.0 * x)); }

/// One coordinate factor of the integrand.
inline double synthetic_factor(const SyntheticParams& p, std::size_t i, double x) {
  const double step = 0.5 - synthetic_sigmoid(x - p.C[i]);
  return p.H[i] * synthetic_bump((x - p.C[i]) / p.R[i], p.F[i]) + (p.P[i] ? -step : step);
}

inline double eval_integrand(const SyntheticParams& p, std::span<const double> x) {
  detail::require(x.size() == p.dim(), "eval_integrand: dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) v *= synthetic_factor(p, i, x[i]);
  return v;
}

/// int_0^1 of one factor, split at the bump support edges and at C.
inline double reference_factor(const SyntheticParams& p, std::size_t i, double tol = 1e-10) {
  std::vector<double> cuts{0.0, 1.0};
  for (double c : {p.C[i] - p.R[i], p.C[i], p.C[i] + p.R[i]})
    if (c > 0.0 && c < 1.0) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    auto f = [&](double x) { return synthetic_factor(p, i, x); };
    const QuadResult r = integrate_adaptive(f, cuts[j], cuts[j + 1], tol, tol, 2000);
    if (!r.converged) throw ReferenceError("reference_integral: quadrature did not converge");
    total += r.value;
  }
  return total;
}

inline double reference_integral(const SyntheticParams& p) {
  p.validate();
  double v = 1.0;
  for (std::size_t i = 0; i < p.dim(); ++i) v *= reference_factor(p, i);
  return v;
}

/// Parameter sets printed in figure captions, with their printed integrals.
struct SyntheticFixture {
  const char* name;
  SyntheticParams params;
  double printed_integral;
};

inline std::vector<SyntheticFixture> synthetic_fixtures() {
  return {
      {"fig1", {{0.554}, {0.0726}, {1.64}, {2.65}, {1}}, 0.011},
      {"kernel_choice", {{0.835}, {0.111}, {3.50}, {1.63}, {0}}, 0.156},
      {"full_vs_empirical", {{0.520}, {0.0897}, {1.87}, {3.04}, {1}}, 0.0764},
  };
}

inline SyntheticParams fixture_params(const std::string& name) {
  for (const auto& f : synthetic_fixtures())
    if (name == f.name) return f.params;
  throw InvalidInput("unknown synthetic fixture: " + name);
}

}  // namespace adacube
