#pragma once

// Gauss rules on the reference interval, triangle and tetrahedron. The simplex
// rules are collapsed (Duffy) tensor products of Gauss-Legendre rules; they
// only back the independent cross-check of the boundary-reduction moments and
// the test oracles.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace vem {

struct QuadRule {
  std::vector<Eigen::VectorXd> points;  // reference coordinates
  std::vector<double> weights;
};

namespace detail {

/// Legendre polynomial P_n and its derivative at x.
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [0, 1]; exact for degree 2n - 1.
inline QuadRule gauss_legendre(int n) {
  QuadRule rule;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre(n, x).second;
    Eigen::VectorXd pt(1);
    pt(0) = 0.5 * (1.0 - x);
    rule.points.push_back(pt);
    rule.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}

/// Rule on the reference triangle {(s,t): s,t >= 0, s+t <= 1} (area 1/2),
/// exact for polynomials of total degree <= `degree`.
inline QuadRule triangle_rule(int degree) {
  const QuadRule g = gauss_legendre((degree + 3) / 2);
  QuadRule rule;
  for (std::size_t i = 0; i < g.points.size(); ++i)
    for (std::size_t j = 0; j < g.points.size(); ++j) {
      const double u = g.points[i](0), v = g.points[j](0);
      Eigen::VectorXd pt(2);
      pt << u, (1.0 - u) * v;
      rule.points.push_back(pt);
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  return rule;
}

/// Rule on the reference tetrahedron (volume 1/6), exact for total degree
/// <= `degree`.
inline QuadRule tetrahedron_rule(int degree) {
  const QuadRule g = gauss_legendre((degree + 4) / 2);
  QuadRule rule;
  for (std::size_t i = 0; i < g.points.size(); ++i)
    for (std::size_t j = 0; j < g.points.size(); ++j)
      for (std::size_t l = 0; l < g.points.size(); ++l) {
        const double u = g.points[i](0), v = g.points[j](0), w = g.points[l](0);
        Eigen::VectorXd pt(3);
        pt << u, (1.0 - u) * v, (1.0 - u) * (1.0 - v) * w;
        rule.points.push_back(pt);
        rule.weights.push_back(g.weights[i] * g.weights[j] * g.weights[l] * (1.0 - u) * (1.0 - u) * (1.0 - v));
      }
  return rule;
}

}  // namespace vem
