#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/grid.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/systems.hpp"

namespace qmetric {

// Observables of the separable two-electron state psi = sqrt(2) Phi(R) chi(r),
// chi = f(s) e^{i m phi_s}, with |Phi(R)|^2 = (A/pi) exp(-A R^2). Substituting
// s = r1 - r2 reduces the one-body integrals to convolutions against the CM
// Gaussian:
//   rho(r1)   = 2   int |Phi(r1 - s/2)|^2 f(s)^2                 d^2 s
//   j_phi(r1) = 2 m int |Phi(r1 - s/2)|^2 f(s)^2 cos(phi_s) / s  d^2 s |_{phi-projected}
// Both are evaluated per target radius by an (s-radial x angular) product rule.
// The exponent is assembled whole, -A |r1 - s/2|^2, so nothing overflows.

/// rho(r) samples on a radial grid; particles per unit area, N = 2.
struct DensityProfile {
  RadialGridPtr grid;
  std::vector<double> rho;
  double n_particles = 2.0;
};

/// Azimuthal current j_phi(r); the radial component vanishes by symmetry.
/// sign convention: m < 0 gives j_phi < 0 (clockwise seen from +z).
struct CurrentProfile {
  RadialGridPtr grid;
  std::vector<double> j_phi;
  int m = 0;
  bool sign_definite = true; // r*j_phi has the sign of m wherever it is non-negligible
};

struct ProfilePair {
  DensityProfile density;
  CurrentProfile current;
};

/// Quadrature for the inner convolution integral over s.
struct InnerRule {
  RadialGridPtr s_grid;
  AngularRule angular;
};

inline InnerRule default_inner_rule(double r_max, std::size_t n_s = 400, std::size_t n_phi = 64) {
  return InnerRule{make_radial_grid(n_s, r_max), build_angular_rule(n_phi)};
}

/// Core convolution kernel: profiles of a state given its relative profile
/// evaluator, quantum number and CM Gaussian exponent. The per-target-radius
/// integrals are independent and run in parallel.
inline ProfilePair convolve_profiles(const std::function<double(double)>& f_of_r, int m,
                                     double cm_exponent, RadialGridPtr grid,
                                     const InnerRule& rule, int threads = 1) {
  if (!grid || grid->size() == 0) throw std::invalid_argument("convolve_profiles: missing grid");
  if (!rule.s_grid || rule.s_grid->size() == 0 || rule.angular.size() == 0)
    throw std::invalid_argument("convolve_profiles: missing inner rule");
  if (!(cm_exponent > 0.0)) throw std::invalid_argument("convolve_profiles: cm_exponent must be > 0");

  const RadialGrid& s = *rule.s_grid;
  const std::size_t ns = s.size();
  const std::size_t nphi = rule.angular.size();
  const double A = cm_exponent;

  std::vector<double> f2(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    const double v = f_of_r(s.nodes[k]);
    if (!std::isfinite(v)) throw invalid_value("convolve_profiles: non-finite profile sample");
    f2[k] = v * v;
  }
  std::vector<double> cphi(nphi);
  for (std::size_t j = 0; j < nphi; ++j) cphi[j] = std::cos(rule.angular.nodes[j]);

  const std::size_t nt = grid->size();
  std::vector<double> rho(nt, 0.0);
  std::vector<double> jphi(nt, 0.0);

  parallel_for(nt, threads, [&](std::size_t t) {
    const double r = grid->nodes[t];
    double acc0 = 0.0; // angular integral of the kernel, s-weighted with s ds
    double acc1 = 0.0; // cos-projected integral, s-weighted with ds
    for (std::size_t k = 0; k < ns; ++k) {
      if (f2[k] == 0.0) continue;
      const double sk = s.nodes[k];
      const double closest = r - 0.5 * sk;
      if (A * closest * closest > 170.0) continue; // kernel < 1e-74 for every angle
      double row0 = 0.0;
      double row1 = 0.0;
      const double r2 = r * r + 0.25 * sk * sk;
      const double rs = r * sk;
      for (std::size_t j = 0; j < nphi; ++j) {
        const double e = std::exp(-A * (r2 - rs * cphi[j]));
        row0 += rule.angular.weights[j] * e;
        row1 += rule.angular.weights[j] * cphi[j] * e;
      }
      acc0 += s.weights[k] * sk * f2[k] * row0;
      acc1 += s.weights[k] * f2[k] * row1;
    }
    rho[t] = 2.0 * (A / std::numbers::pi) * acc0;
    jphi[t] = 2.0 * static_cast<double>(m) * (A / std::numbers::pi) * acc1;
  });

  // Internal consistency: the quadrature must reproduce the exact reductions
  //   int rho d^2r = 2 * ||f||^2,  int [r x j]_z d^2r = m * ||f||^2,
  // where ||f||^2 is the f-norm seen by the inner rule itself.
  double norm_s = 0.0;
  for (std::size_t k = 0; k < ns; ++k) norm_s += s.weights[k] * s.nodes[k] * f2[k];
  norm_s *= 2.0 * std::numbers::pi;

  double n_int = 0.0;
  double lz_int = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const double w = grid->weights[t];
    const double r = grid->nodes[t];
    n_int += w * r * rho[t];
    lz_int += w * r * r * jphi[t];
  }
  n_int *= 2.0 * std::numbers::pi;
  lz_int *= 2.0 * std::numbers::pi;

  const double n_expect = 2.0 * norm_s;
  const double lz_expect = static_cast<double>(m) * norm_s;
  if (std::abs(n_int - n_expect) > 1e-6 * std::max(1.0, std::abs(n_expect))) {
    std::ostringstream msg;
    msg << "convolve_profiles: particle-number quadrature check failed: " << n_int << " vs "
        << n_expect;
    throw accuracy_failure(msg.str());
  }
  if (std::abs(lz_int - lz_expect) > 1e-6 * std::max(1.0, std::abs(lz_expect))) {
    std::ostringstream msg;
    msg << "convolve_profiles: angular-momentum quadrature check failed: " << lz_int << " vs "
        << lz_expect;
    throw accuracy_failure(msg.str());
  }

  ProfilePair out;
  out.density.grid = grid;
  out.density.rho = std::move(rho);
  out.current.grid = grid;
  out.current.j_phi = std::move(jphi);
  out.current.m = m;

  double peak = 0.0;
  for (double v : out.current.j_phi) peak = std::max(peak, std::abs(v));
  bool definite = true;
  if (m != 0 && peak > 0.0) {
    const double sgn = m > 0 ? 1.0 : -1.0;
    for (double v : out.current.j_phi)
      if (std::abs(v) > 1e-12 * peak && v * sgn < 0.0) {
        definite = false;
        break;
      }
  }
  out.current.sign_definite = definite;
  return out;
}

inline ProfilePair make_profiles(const GroundState& gs, RadialGridPtr grid, const InnerRule& rule,
                                 int threads = 1) {
  if (!gs.f_eval) throw std::invalid_argument("make_profiles: ground state has no profile evaluator");
  return convolve_profiles(gs.f_eval, gs.m, gs.cm_exponent, std::move(grid), rule, threads);
}

inline DensityProfile density(const GroundState& gs, RadialGridPtr grid, const InnerRule& rule,
                              int threads = 1) {
  return make_profiles(gs, std::move(grid), rule, threads).density;
}

inline CurrentProfile paramagnetic_current(const GroundState& gs, RadialGridPtr grid,
                                           const InnerRule& rule, int threads = 1) {
  return make_profiles(gs, std::move(grid), rule, threads).current;
}

/// The three conservation integrals and their verdicts at tolerance 1e-6
/// (relative where the target is nonzero).
struct ConservationReport {
  double n_integral = 0.0;      // 2*pi*int rho r dr, target 2
  double lz_integral = 0.0;     // 2*pi*int j_phi r^2 dr, target m
  double abs_lz_integral = 0.0; // 2*pi*int |j_phi| r^2 dr, target |m|
  bool n_ok = false;
  bool lz_ok = false;
  bool abs_lz_ok = false;
  bool sign_definite = false;
  bool pass = false;
  double tolerance = 1e-6;
};

inline ConservationReport check_conservation(const GroundState& gs, const DensityProfile& rho,
                                             const CurrentProfile& cur) {
  if (!same_grid(rho.grid, cur.grid))
    throw incompatible_grids("check_conservation: profiles on different grids");
  const RadialGrid& g = *rho.grid;
  ConservationReport rep;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = g.weights[k];
    const double r = g.nodes[k];
    rep.n_integral += w * r * rho.rho[k];
    rep.lz_integral += w * r * r * cur.j_phi[k];
    rep.abs_lz_integral += w * r * r * std::abs(cur.j_phi[k]);
  }
  rep.n_integral *= 2.0 * std::numbers::pi;
  rep.lz_integral *= 2.0 * std::numbers::pi;
  rep.abs_lz_integral *= 2.0 * std::numbers::pi;

  const double tol = rep.tolerance;
  const double m = static_cast<double>(gs.m);
  rep.n_ok = std::abs(rep.n_integral - 2.0) <= tol * 2.0;
  rep.lz_ok = std::abs(rep.lz_integral - m) <= tol * std::max(1.0, std::abs(m));
  rep.abs_lz_ok = std::abs(rep.abs_lz_integral - std::abs(m)) <= tol * std::max(1.0, std::abs(m));
  rep.sign_definite = cur.sign_definite;
  rep.pass = rep.n_ok && rep.lz_ok && rep.abs_lz_ok && rep.sign_definite;
  return rep;
}

} // namespace qmetric
