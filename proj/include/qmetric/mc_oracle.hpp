#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "qmetric/errors.hpp"

namespace qmetric {

/// Plain Monte-Carlo estimate of the density/current convolution integrals at
/// a single radius. This is a verification path deliberately independent of
/// the product quadrature: points are drawn uniformly over the s-disk and the
/// raw integrands averaged.
struct McEstimate {
  double rho = 0.0;
  double rho_stderr = 0.0;
  double j_phi = 0.0;
  double j_phi_stderr = 0.0;
};

inline McEstimate mc_profile_at(const std::function<double(double)>& f_of_r, int m,
                                double cm_exponent, double r, double s_max,
                                std::size_t n_samples, std::uint64_t seed) {
  if (!(s_max > 0.0)) throw std::invalid_argument("mc_profile_at: s_max must be positive");
  if (n_samples < 2) throw std::invalid_argument("mc_profile_at: need at least 2 samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  const double A = cm_exponent;
  const double area = std::numbers::pi * s_max * s_max;
  double sum_r = 0.0;
  double sum_r2 = 0.0;
  double sum_j = 0.0;
  double sum_j2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = s_max * std::sqrt(uni(rng)); // uniform over the disk
    const double phi = 2.0 * std::numbers::pi * uni(rng);
    const double c = std::cos(phi);
    const double d2 = r * r - r * s * c + 0.25 * s * s;
    const double f = f_of_r(s);
    const double kern = std::exp(-A * d2) * f * f;
    const double g_rho = 2.0 * (A / std::numbers::pi) * kern;
    const double g_j = 2.0 * static_cast<double>(m) * (A / std::numbers::pi) * kern * c / s;
    sum_r += g_rho;
    sum_r2 += g_rho * g_rho;
    sum_j += g_j;
    sum_j2 += g_j * g_j;
  }
  const double n = static_cast<double>(n_samples);
  McEstimate out;
  out.rho = area * sum_r / n;
  out.j_phi = area * sum_j / n;
  const double var_r = std::max(0.0, sum_r2 / n - (sum_r / n) * (sum_r / n));
  const double var_j = std::max(0.0, sum_j2 / n - (sum_j / n) * (sum_j / n));
  out.rho_stderr = area * std::sqrt(var_r / n);
  out.j_phi_stderr = area * std::sqrt(var_j / n);
  return out;
}

} // namespace qmetric
