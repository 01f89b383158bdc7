/**
 * @file quadrature.hpp
 * @brief Globally adaptive 21-point Gauss-Kronrod integration on an interval.
 *
 * Interval selection follows the usual QUADPACK QAG scheme: the panel with the
 * largest error estimate is bisected until the summed estimate meets
 * max(abs_tol, rel_tol * |result|) or the panel budget runs out.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace adacube {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  std::size_t panels = 0;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[10];
  double resabs = std::abs(resk);
  double resg = 0.0;
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double s = f1[j] + f2[j];
    resk += kWgk[j] * s;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double ahalf = std::abs(half);
  resk *= half;
  resabs *= ahalf;
  resasc *= ahalf;
  double err = std::abs(resk - resg * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();
  if (resabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, resk, err};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G10/K21) on [a,b].
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                              std::size_t max_panels = 500) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk21(f, a, b));
  double total = heap.top().value, err = heap.top().error;
  out.panels = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (out.panels >= max_panels) {
      out.value = total;
      out.error = err;
      return out;
    }
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const detail::Panel left = detail::gk21(f, worst.a, mid);
    const detail::Panel right = detail::gk21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++out.panels;
  }
  // Re-sum from the panels to shed the running-update rounding.
  total = 0.0;
  err = 0.0;
  std::vector<detail::Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& p : panels) {
    total += p.value;
    err += p.error;
  }
  out.value = total;
  out.error = err;
  out.converged = err <= std::max(abs_tol, rel_tol * std::abs(total));
  return out;
}

}  // namespace adacube
