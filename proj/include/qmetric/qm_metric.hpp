#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "qmetric/errors.hpp"
#include "qmetric/grid.hpp"
#include "qmetric/lp_metric.hpp"
#include "qmetric/observables.hpp"
#include "qmetric/systems.hpp"

namespace qmetric {

// The wavefunction metric
//   D_psi^2 = int(|psi1|^2 + |psi2|^2) - 2 |int psi1* psi2| = 2N - 2 |overlap|
// is evaluated semi-analytically from the separable structure: with both CM
// factors in their M = 0 Gaussian,
//   int psi1* psi2 = 2 delta_{m1 m2} S_cm S_rel,
//   S_cm  = 2 sqrt(Om1 Om2) / (Om1 + Om2)        (Gaussian overlap, exact)
//   S_rel = 2 pi int f1 f2 r dr                  (1D quadrature)
// The Kronecker delta is the angular selection rule int e^{i(m2-m1)phi} dphi;
// it is what pins every cross-shell distance at exactly sqrt(2N) = 2.

inline double cm_overlap(double Omega1, double Omega2) {
  return 2.0 * std::sqrt(Omega1 * Omega2) / (Omega1 + Omega2);
}

inline double relative_overlap(const GroundState& a, const GroundState& b) {
  if (!same_grid(a.f.grid, b.f.grid))
    throw incompatible_grids("relative_overlap: states sampled on different grids");
  const RadialGrid& g = *a.f.grid;
  double acc = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    acc += g.weights[k] * g.nodes[k] * a.f.values[k] * b.f.values[k];
  return 2.0 * std::numbers::pi * acc;
}

/// D_psi between two-electron ground states; values in [0, 2].
inline double d_psi(const GroundState& a, const GroundState& b) {
  // identical states: the identity axiom holds exactly, skip the quadrature
  if (&a == &b ||
      (a.m == b.m && a.Omega == b.Omega && same_grid(a.f.grid, b.f.grid) &&
       a.f.values == b.f.values))
    return 0.0;
  if (a.m != b.m) return 2.0;
  const double s = cm_overlap(a.Omega, b.Omega) * relative_overlap(a, b);
  return std::sqrt(std::max(0.0, 4.0 - 4.0 * std::abs(s)));
}

/// Distance to the zero function: sqrt(int |psi|^2) = sqrt(N).
inline double d_psi_to_zero(const GroundState& a) {
  return std::sqrt(2.0 * relative_overlap(a, a));
}

/// Density as a measured function under d^2r = 2 pi r dr.
inline MeasuredFunction<double> density_as_measured(const DensityProfile& p) {
  MeasuredFunction<double> f;
  f.grid = p.grid;
  f.measure.resize(p.grid->size());
  for (std::size_t k = 0; k < p.grid->size(); ++k)
    f.measure[k] = 2.0 * std::numbers::pi * p.grid->nodes[k];
  f.values = p.rho;
  return f;
}

/// The z angular-momentum density [r x j_p]_z = r j_phi as a measured function.
inline MeasuredFunction<double> angular_momentum_density(const CurrentProfile& c) {
  MeasuredFunction<double> f;
  f.grid = c.grid;
  f.measure.resize(c.grid->size());
  f.values.resize(c.grid->size());
  for (std::size_t k = 0; k < c.grid->size(); ++k) {
    f.measure[k] = 2.0 * std::numbers::pi * c.grid->nodes[k];
    f.values[k] = c.grid->nodes[k] * c.j_phi[k];
  }
  return f;
}

/// D_rho = int |rho1 - rho2| d^2r; values in [0, 2N] = [0, 4].
inline double d_rho(const DensityProfile& a, const DensityProfile& b) {
  return lp_distance(density_as_measured(a), density_as_measured(b), 1.0);
}

inline double d_rho_to_zero(const DensityProfile& a) {
  return p_norm(density_as_measured(a), 1.0);
}

/// D_{j_p,perp} = int |{r x [j1 - j2]}_z| d^2r; bounded by |m1| + |m2|.
inline double d_jp(const CurrentProfile& a, const CurrentProfile& b) {
  return lp_distance(angular_momentum_density(a), angular_momentum_density(b), 1.0);
}

inline double d_jp_to_zero(const CurrentProfile& a) {
  return p_norm(angular_momentum_density(a), 1.0);
}

/// Triangle bound through the zero current: |m1| + |m2|.
inline double triangle_bound(int m1, int m2) {
  return static_cast<double>(std::abs(m1)) + static_cast<double>(std::abs(m2));
}

/// Polar angle theta on the onion shell from the law of cosines,
///   cos(theta) = (m_ref^2 + m^2 - D^2) / (2 |m_ref| |m|).
/// The ratio is clamped into [-1, 1] when it overshoots by at most 1e-9
/// (quadrature noise); larger excursions are genuine inconsistencies.
inline double sphere_angle(int m_ref, int m, double D) {
  if (m_ref == 0 || m == 0)
    throw undefined_angle("sphere_angle: shell of |m| = 0 has no polar angle");
  if (!(D >= 0.0)) throw std::invalid_argument("sphere_angle: distance must be >= 0");
  const double mr = static_cast<double>(m_ref);
  const double mm = static_cast<double>(m);
  double ratio = (mr * mr + mm * mm - D * D) / (2.0 * std::abs(mr) * std::abs(mm));
  if (ratio > 1.0 + 1e-9 || ratio < -1.0 - 1e-9) {
    std::ostringstream msg;
    msg << "sphere_angle: law-of-cosines ratio " << ratio << " outside [-1, 1] for m_ref=" << m_ref
        << ", m=" << m << ", D=" << D;
    throw inconsistent_distance(msg.str());
  }
  ratio = std::min(1.0, std::max(-1.0, ratio));
  return std::acos(ratio);
}

/// A state's position on its shell relative to a reference.
struct ShellPoint {
  double shell_radius = 0.0;    // sqrt(N), N or |m| depending on the space
  double distance_to_ref = 0.0;
  double theta = 0.0;           // polar angle in [0, pi]
};

} // namespace qmetric
