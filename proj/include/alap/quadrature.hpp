#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace alap::quad {

namespace detail {

template <typename F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double eps, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f on [a, b] with Richardson correction.
///
/// The tolerance is relative to a coarse 16-panel estimate of the integral, so
/// it is meaningful for the nonnegative monotone integrands used throughout
/// this library. Panels that reach max_depth are accepted as they stand.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-10,
                        int max_depth = 60) {
  if (a == b) return 0.0;
  constexpr int kPanels = 16;
  const double w = (b - a) / kPanels;
  std::vector<double> xs(kPanels + 1);
  std::vector<double> fs(kPanels + 1);
  for (int i = 0; i <= kPanels; ++i) {
    xs[i] = (i == kPanels) ? b : a + i * w;
    fs[i] = f(xs[i]);
  }
  std::vector<double> mids(kPanels);
  double coarse = 0.0;
  std::vector<double> wholes(kPanels);
  for (int i = 0; i < kPanels; ++i) {
    const double m = 0.5 * (xs[i] + xs[i + 1]);
    mids[i] = f(m);
    wholes[i] = (xs[i + 1] - xs[i]) / 6.0 * (fs[i] + 4.0 * mids[i] + fs[i + 1]);
    coarse += wholes[i];
  }
  const double eps = rel_tol * std::max(std::abs(coarse), 1e-300) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double m = 0.5 * (xs[i] + xs[i + 1]);
    total += detail::simpson_step(f, xs[i], fs[i], xs[i + 1], fs[i + 1], m,
                                  mids[i], wholes[i], eps, max_depth);
  }
  return total;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int points) {
  GaussLegendreRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  for (int i = 0; i < (points + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (points == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[points - 1 - i] = x;
    const double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = wgt;
    rule.weights[points - 1 - i] = wgt;
  }
  return rule;
}

template <typename F>
double gauss_panel(F&& f, double a, double b, const GaussLegendreRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * s;
}

}  // namespace alap::quad
