#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "strongmax/grid.hpp"

namespace strongmax {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline const GaussRule& gauss16() {
  static const GaussRule rule = gauss_legendre(16);
  return rule;
}

/// Average of fn over one cell by tensor 16-point Gauss-Legendre quadrature.
template <class Fn>
double cell_average(const GridShape& s, const Index3& cell, Fn&& fn) {
  const auto& g = gauss16();
  std::size_t q = g.nodes.size();
  std::array<std::size_t, kMaxDims> count{1, 1, 1};
  for (int k = 0; k < s.dims; ++k) count[k] = q;
  double acc = 0.0;
  Point3 x{};
  for (std::size_t a = 0; a < count[0]; ++a)
    for (std::size_t b = 0; b < count[1]; ++b)
      for (std::size_t c = 0; c < count[2]; ++c) {
        std::array<std::size_t, kMaxDims> node{a, b, c};
        double w = 1.0;
        for (int k = 0; k < s.dims; ++k) {
          double lo = s.origin[k] + static_cast<double>(cell[k]) * s.cell_size[k];
          x[k] = lo + 0.5 * s.cell_size[k] * (g.nodes[node[k]] + 1.0);
          w *= 0.5 * g.weights[node[k]];
        }
        acc += w * fn(x);
      }
  return acc;
}

/// Samples fn at cell midpoints, except on cells where `singular(cell)` holds,
/// which receive their 16-point per-axis quadrature average.
template <class Fn, class Pred>
GridFunction sample_weight(const GridShape& s, Fn&& fn, Pred&& singular) {
  std::vector<double> v(s.cell_count());
  for (std::size_t f = 0; f < v.size(); ++f) {
    Index3 i = s.unflatten(f);
    v[f] = singular(i) ? cell_average(s, i, fn) : fn(s.center(i));
  }
  return GridFunction(s, std::move(v));
}

/// Every cell gets its quadrature average.
template <class Fn>
GridFunction sample_cell_averages(const GridShape& s, Fn&& fn) {
  return sample_weight(s, fn, [](const Index3&) { return true; });
}

/// Euclidean norm of a point in the grid's active axes.
inline double euclidean_norm(const Point3& x, int dims) {
  double r = 0.0;
  for (int k = 0; k < dims; ++k) r += x[k] * x[k];
  return std::sqrt(r);
}

}  // namespace strongmax
