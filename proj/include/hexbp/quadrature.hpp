// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hexbp {

enum class QuadKind { GLL, GL };

/// One-dimensional quadrature rule on [-1, 1]. Points are strictly
/// increasing and symmetric about the origin; weights are positive and
/// sum to 2.
struct QuadRule1D {
  QuadKind kind = QuadKind::GL;
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// Legendre polynomial P_n and its derivative at x, by the three-term
/// recurrence (derivative tracked alongside, stable at x = +-1).
inline std::pair<double, double> legendre_eval(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double pm1 = 1.0, dm1 = 0.0;  // P_0, P_0'
  double p = x, d = 1.0;        // P_1, P_1'
  for (int k = 1; k < n; ++k) {
    const double pk1 = ((2 * k + 1) * x * p - k * pm1) / (k + 1);
    const double dk1 = dm1 + (2 * k + 1) * p;
    pm1 = p;
    dm1 = d;
    p = pk1;
    d = dk1;
  }
  return {p, d};
}

namespace detail {

inline constexpr int kNodeNewtonMaxIter = 100;
inline constexpr double kNodeNewtonTol = 1e-15;

// Newton iteration for f(x) = 0 safeguarded by a bracket [lo, hi] with a
// sign change; falls back to bisection whenever a step leaves the bracket.
// F returns (f, f').
template <class F>
double bracketed_newton(F&& f, double guess, double lo, double hi) {
  const double flo = f(lo).first;
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int it = 0; it < kNodeNewtonMaxIter; ++it) {
    const auto [fx, dfx] = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0))
      lo = x;
    else
      hi = x;
    double xn = x - fx / dfx;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    const bool done = std::abs(xn - x) <= kNodeNewtonTol && std::abs(fx) <= kNodeNewtonTol;
    x = xn;
    if (done) break;
  }
  return x;
}

}  // namespace detail

/// Gauss-Legendre rule with n points: roots of P_n, exact for
/// polynomials of degree <= 2n-1.
inline QuadRule1D gl_rule(int n) {
  if (n < 1) throw std::invalid_argument("gl_rule: need at least 1 point");
  QuadRule1D rule;
  rule.kind = QuadKind::GL;
  rule.points.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  // Solve on the negative half and mirror so the rule is exactly
  // symmetric. In theta = arccos(-x), roots sit near uniform spacing
  // pi/(n+1/2); half a spacing on either side brackets exactly one root.
  const double spacing = std::numbers::pi / (n + 0.5);
  auto f = [n](double x) { return legendre_eval(n, x); };
  for (int i = 0; i < n / 2; ++i) {
    const double theta = spacing * (i + 0.75);
    const double guess = -std::cos(theta);
    const double lo = -std::cos(theta - 0.5 * spacing);
    const double hi = -std::cos(theta + 0.5 * spacing);
    const double x = detail::bracketed_newton(f, guess, lo, hi);
    rule.points[i] = x;
    rule.points[n - 1 - i] = -x;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;

  for (int i = 0; i <= (n - 1) / 2; ++i) {
    const double x = rule.points[i];
    const double dp = legendre_eval(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Gauss-Lobatto-Legendre rule with n points: endpoints +-1 plus the
/// roots of P'_{n-1}; weights w_i = 2 / (n(n-1) P_{n-1}(x_i)^2).
inline QuadRule1D gll_rule(int n) {
  if (n < 2) throw std::invalid_argument("gll_rule: need at least 2 points");
  QuadRule1D rule;
  rule.kind = QuadKind::GLL;
  rule.points.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  rule.points[0] = -1.0;
  rule.points[n - 1] = 1.0;

  const int m = n - 2;  // interior node count
  if (m > 0) {
    // Consecutive roots of P_{n-1} bracket each root of P'_{n-1} (Rolle).
    const QuadRule1D inner = gl_rule(n - 1);
    auto fprime = [n](double x) {
      const auto [p, dp] = legendre_eval(n - 1, x);
      // Legendre ODE: (1-x^2) P'' = 2x P' - n(n+1) P
      const double d2p = (2.0 * x * dp - static_cast<double>(n - 1) * n * p) / (1.0 - x * x);
      return std::pair<double, double>{dp, d2p};
    };
    for (int i = 0; i < m / 2; ++i) {
      const double lo = inner.points[i];
      const double hi = inner.points[i + 1];
      const double guess = -std::cos(std::numbers::pi * (i + 1) / (n - 1));  // Chebyshev-Lobatto
      const double x = detail::bracketed_newton(fprime, guess, lo, hi);
      rule.points[1 + i] = x;
      rule.points[n - 2 - i] = -x;
    }
    if (m % 2 == 1) rule.points[1 + m / 2] = 0.0;
  }

  for (int i = 0; i <= (n - 1) / 2; ++i) {
    const double x = rule.points[i];
    const double p = legendre_eval(n - 1, x).first;
    const double w = 2.0 / (static_cast<double>(n) * (n - 1) * p * p);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace hexbp
