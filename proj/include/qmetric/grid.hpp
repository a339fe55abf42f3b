#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "qmetric/errors.hpp"

namespace qmetric {

/// Quadrature rule for integrals over the half-line, truncated at r_max.
/// Nodes are strictly inside (0, r_max); integrands are assumed negligible
/// beyond the cutoff.
struct RadialGrid {
  std::vector<double> nodes;   // radii, strictly increasing
  std::vector<double> weights; // sum w_k g(r_k) ~ int_0^{r_max} g(r) dr
  double r_max = 0.0;

  std::size_t size() const { return nodes.size(); }
};

using RadialGridPtr = std::shared_ptr<const RadialGrid>;

/// Periodic rule on [0, 2pi); weights sum to 2pi.
struct AngularRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

enum class GridScheme {
  gauss_legendre_mapped, // Gauss-Legendre on [-1,1] mapped linearly to [0, r_max]
  uniform_trapezoid,     // open uniform rule, nodes at cell centers (k+1/2)h
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Asymptotic root estimate, then Newton.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 - static_cast<double>(j) * p2) /
             (static_cast<double>(j) + 1.0);
      }
      pp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

} // namespace detail

/// Build a quadrature grid on (0, r_max).
///
/// gauss_legendre_mapped: n-point Gauss-Legendre, exact for polynomials of
/// degree <= 2n-1 in the mapped variable.
/// uniform_trapezoid: open uniform rule with nodes at (k+1/2)h, h = r_max/n.
/// The open placement keeps every node strictly inside (0, r_max) while
/// remaining exact for constants.
inline RadialGrid build_radial_grid(std::size_t n, double r_max, GridScheme scheme) {
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw std::invalid_argument("build_radial_grid: r_max must be positive and finite");
  if (n < 16) throw std::invalid_argument("build_radial_grid: need at least 16 nodes");

  RadialGrid g;
  g.r_max = r_max;
  g.nodes.resize(n);
  g.weights.resize(n);
  switch (scheme) {
    case GridScheme::gauss_legendre_mapped: {
      std::vector<double> x;
      std::vector<double> w;
      detail::gauss_legendre(n, x, w);
      for (std::size_t k = 0; k < n; ++k) {
        g.nodes[k] = 0.5 * r_max * (x[k] + 1.0);
        g.weights[k] = 0.5 * r_max * w[k];
      }
      break;
    }
    case GridScheme::uniform_trapezoid: {
      const double h = r_max / static_cast<double>(n);
      for (std::size_t k = 0; k < n; ++k) {
        g.nodes[k] = (static_cast<double>(k) + 0.5) * h;
        g.weights[k] = h;
      }
      break;
    }
  }
  return g;
}

inline RadialGridPtr make_radial_grid(std::size_t n, double r_max,
                                      GridScheme scheme = GridScheme::gauss_legendre_mapped) {
  return std::make_shared<const RadialGrid>(build_radial_grid(n, r_max, scheme));
}

/// Uniform periodic rule; exact for trigonometric polynomials of degree < n.
inline AngularRule build_angular_rule(std::size_t n) {
  if (n < 4) throw std::invalid_argument("build_angular_rule: need at least 4 nodes");
  AngularRule rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, 2.0 * std::numbers::pi / static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j)
    rule.nodes[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
  return rule;
}

/// sum_k w_k v_k for samples v on the grid nodes.
inline double integrate_radial(std::span<const double> values, const RadialGrid& grid) {
  if (values.size() != grid.size())
    throw std::invalid_argument("integrate_radial: value/node length mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) throw invalid_value("integrate_radial: non-finite sample");
    acc += grid.weights[k] * values[k];
  }
  return acc;
}

/// Real radial function sampled on a (shared) quadrature grid.
struct SampledRadialFunction {
  RadialGridPtr grid;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// 2*pi * int f^2 r dr on the function's own grid.
inline double radial_norm_squared(const SampledRadialFunction& f) {
  const RadialGrid& g = *f.grid;
  double acc = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k)
    acc += g.weights[k] * g.nodes[k] * f.values[k] * f.values[k];
  return 2.0 * std::numbers::pi * acc;
}

/// True when two functions share the same quadrature (same object or equal content).
inline bool same_grid(const RadialGridPtr& a, const RadialGridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->nodes == b->nodes && a->weights == b->weights && a->r_max == b->r_max;
}

} // namespace qmetric
