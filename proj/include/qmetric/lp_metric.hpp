#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/grid.hpp"

namespace qmetric {

/// A function sampled on a radial quadrature grid together with the per-node
/// factor that converts samples into the physical measure (2*pi*r_k for a
/// circularly symmetric planar function, 1 for a plain line measure).
/// Integrals are sum_k grid.weights[k] * measure[k] * g(values[k]).
template <class T = double>
struct MeasuredFunction {
  RadialGridPtr grid;
  std::vector<double> measure;
  std::vector<T> values;

  std::size_t size() const { return values.size(); }
};

/// A conservation statement: int |f|^p dx = c with p >= 1 and 0 < c < inf.
struct ConservationLaw {
  double p = 1.0;
  double c = 1.0;

  ConservationLaw(double p_, double c_) : p(p_), c(c_) {
    if (!(p >= 1.0)) throw std::invalid_argument("ConservationLaw: p must be >= 1");
    if (!(c > 0.0) || !std::isfinite(c))
      throw std::invalid_argument("ConservationLaw: c must be positive and finite");
  }

  /// Radius of the sphere on which every function obeying the law lies.
  double shell_radius() const { return std::pow(c, 1.0 / p); }
};

namespace detail {

template <class T>
void validate_measured(const MeasuredFunction<T>& f) {
  if (!f.grid || f.grid->size() != f.measure.size() || f.measure.size() != f.values.size())
    throw std::invalid_argument("MeasuredFunction: arrays not congruent with grid");
  for (double m : f.measure)
    if (!(m >= 0.0)) throw std::invalid_argument("MeasuredFunction: negative measure weight");
  for (const T& v : f.values)
    if (!std::isfinite(std::abs(v))) throw invalid_value("MeasuredFunction: non-finite sample");
}

template <class T>
bool same_measure(const MeasuredFunction<T>& a, const MeasuredFunction<T>& b) {
  return same_grid(a.grid, b.grid) && a.measure == b.measure;
}

inline double accumulate_p(double acc_p, double p) {
  return std::pow(acc_p, 1.0 / p);
}

} // namespace detail

/// || f ||_p = [ sum_k w_k measure_k |v_k|^p ]^{1/p}.
template <class T>
double p_norm(const MeasuredFunction<T>& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p_norm: p < 1 is not a norm");
  if constexpr (!std::is_same_v<T, double>) {
    // Complex samples appear only as wavefunction factors, an L^2 setting.
    if (p != 2.0)
      throw std::invalid_argument("p_norm: complex samples are supported for p = 2 only");
  }
  detail::validate_measured(f);
  const RadialGrid& g = *f.grid;
  double acc = 0.0;
  if (p == 1.0) {
    for (std::size_t k = 0; k < f.values.size(); ++k)
      acc += g.weights[k] * f.measure[k] * std::abs(f.values[k]);
    return acc;
  }
  if (p == 2.0) {
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      const double a = std::abs(f.values[k]);
      acc += g.weights[k] * f.measure[k] * a * a;
    }
    return std::sqrt(acc);
  }
  for (std::size_t k = 0; k < f.values.size(); ++k)
    acc += g.weights[k] * f.measure[k] * std::pow(std::abs(f.values[k]), p);
  return detail::accumulate_p(acc, p);
}

/// D(f1, f2) = || f1 - f2 ||_p on a shared grid and measure.
template <class T>
double lp_distance(const MeasuredFunction<T>& f1, const MeasuredFunction<T>& f2, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_distance: p < 1 is not a norm");
  if (!detail::same_measure(f1, f2))
    throw incompatible_grids("lp_distance: functions live on different grids/measures");
  MeasuredFunction<T> diff;
  diff.grid = f1.grid;
  diff.measure = f1.measure;
  diff.values.resize(f1.values.size());
  for (std::size_t k = 0; k < f1.values.size(); ++k)
    diff.values[k] = f1.values[k] - f2.values[k];
  return p_norm(diff, p);
}

/// Distance to the zero function; for a function obeying a conservation law
/// with value c this is c^{1/p}.
template <class T>
double shell_radius(const MeasuredFunction<T>& f, double p) {
  return p_norm(f, p);
}

} // namespace qmetric
