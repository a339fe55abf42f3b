#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "qmetric/eigensolver.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/grid.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/roots.hpp"

namespace qmetric {

// Two parabolically confined electrons in a uniform field B = omegac z_hat,
// symmetric gauge A = (1/2) B x r, atomic units. The pair interaction is
// Coulomb 1/|r1-r2| (Hooke) or inverse-square alpha/|r1-r2|^2 (ISI).
//
// Center-of-mass / relative separation: both Hamiltonians split into a CM
// oscillator of mass 2 and a relative problem of reduced mass 1/2, each with
// effective frequency Omega = sqrt(omega0^2 + omegac^2/4), plus the Zeeman
// term (omegac/2) L_z. The CM stays in its (M=0, n=0) Gaussian ground state
// because E_CM = Omega (2n + |M| + 1) + (omegac/2) M and Omega > omegac/2.

enum class SystemKind { hooke, isi };

/// Reduced mass of the relative coordinate (two electrons, a.u.).
inline constexpr double kRelativeMass = 0.5;

/// Radial cutoff c / sqrt(mu * Omega) with c = 14: Gaussian tails of the
/// profiles, which decay as exp(-mu * Omega * r^2 / 2), are below 1e-20 there.
inline double default_r_max(double Omega, double mu = kRelativeMass) {
  return 14.0 / std::sqrt(mu * Omega);
}

struct SystemParams {
  SystemKind kind = SystemKind::hooke;
  double omega0 = 1.0; // confinement frequency (a.u.)
  double omegac = 0.0; // cyclotron frequency (a.u.)
  double alpha = 0.0;  // inverse-square strength, ISI only
};

inline void validate(const SystemParams& p) {
  if (!(p.omega0 > 0.0) || !std::isfinite(p.omega0))
    throw std::invalid_argument("SystemParams: omega0 must be positive");
  if (!(p.omegac >= 0.0) || !std::isfinite(p.omegac))
    throw std::invalid_argument("SystemParams: omegac must be >= 0");
  if (p.kind == SystemKind::isi && (!(p.alpha > 0.0) || !std::isfinite(p.alpha)))
    throw std::invalid_argument("SystemParams: ISI needs alpha > 0");
}

/// Omega = sqrt(omega0^2 + omegac^2/4).
inline double effective_frequency(double omega0, double omegac) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("effective_frequency: omega0 must be > 0");
  if (!(omegac >= 0.0)) throw std::invalid_argument("effective_frequency: omegac must be >= 0");
  return std::sqrt(omega0 * omega0 + 0.25 * omegac * omegac);
}

struct GroundState {
  SystemParams params;
  int m = 0;            // total L_z quantum number; the CM carries 0
  double Omega = 0.0;   // effective frequency
  double energy = 0.0;  // total ground-state energy (a.u.)
  double m_tilde = 0.0; // effective angular index: sqrt(m^2 + alpha) for ISI, |m| for Hooke
  SampledRadialFunction f;               // relative radial profile, 2*pi*int f^2 r dr = 1
  double cm_exponent = 0.0;              // |Phi(R)|^2 = (cm_exponent/pi) exp(-cm_exponent R^2)
  std::function<double(double)> f_eval;  // smooth evaluator behind f (for re-sampling)
};

// ---------------------------------------------------------------------------
// ISI closed forms. The alpha/r^2 interaction folds into the centrifugal term
// as an effective index m_tilde = sqrt(m^2 + 2 mu alpha) = sqrt(m^2 + alpha),
// so the relative problem is a 2D oscillator in disguise:
//   f(r) ~ r^{m_tilde} exp(-Omega r^2 / 4),  eps_rel = Omega (m_tilde + 1),
//   E = Omega (m_tilde + 2) + (omegac/2) m.
// ---------------------------------------------------------------------------

inline double isi_m_tilde(int m, double alpha) {
  return std::sqrt(static_cast<double>(m) * m + alpha);
}

inline double isi_energy(const SystemParams& p, int m) {
  validate(p);
  if (p.kind != SystemKind::isi) throw std::invalid_argument("isi_energy: wrong system kind");
  const double Om = effective_frequency(p.omega0, p.omegac);
  return Om * (isi_m_tilde(m, p.alpha) + 2.0) + 0.5 * p.omegac * m;
}

/// Normalization constant of f(r) = C r^{mt} exp(-Omega r^2/4):
/// C = [pi (2/Omega)^{mt+1} Gamma(mt+1)]^{-1/2}.
inline double isi_profile_constant(double m_tilde, double Omega) {
  return 1.0 / std::sqrt(std::numbers::pi * std::pow(2.0 / Omega, m_tilde + 1.0) *
                         std::tgamma(m_tilde + 1.0));
}

inline GroundState solve_isi(const SystemParams& p, int m, RadialGridPtr grid) {
  validate(p);
  if (p.kind != SystemKind::isi) throw std::invalid_argument("solve_isi: wrong system kind");
  if (!grid || grid->size() == 0) throw std::invalid_argument("solve_isi: missing grid");

  GroundState gs;
  gs.params = p;
  gs.m = m;
  gs.Omega = effective_frequency(p.omega0, p.omegac);
  gs.m_tilde = isi_m_tilde(m, p.alpha);
  gs.energy = gs.Omega * (gs.m_tilde + 2.0) + 0.5 * p.omegac * m;
  gs.cm_exponent = 2.0 * gs.Omega;

  const double C = isi_profile_constant(gs.m_tilde, gs.Omega);
  const double mt = gs.m_tilde;
  const double Om = gs.Omega;
  gs.f.grid = grid;
  gs.f.values.resize(grid->size());
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double r = grid->nodes[k];
    gs.f.values[k] = C * std::pow(r, mt) * std::exp(-0.25 * Om * r * r);
  }
  // absorb the residual quadrature defect so on-grid norms are exactly 1
  const double scale = 1.0 / std::sqrt(radial_norm_squared(gs.f));
  for (double& v : gs.f.values) v *= scale;
  const double Cs = C * scale;
  gs.f_eval = [Cs, mt, Om](double r) { return Cs * std::pow(r, mt) * std::exp(-0.25 * Om * r * r); };
  return gs;
}

// ---------------------------------------------------------------------------
// Hooke's atom: the relative problem V(r) = Omega^2 r^2/4 + coulomb/r is
// solved numerically. `coulomb` is fixed to 1 in solve_hooke; the generic
// entry point exists for oscillator-limit and polynomial-ansatz checks.
// ---------------------------------------------------------------------------

inline RadialEigenResult hooke_relative_ground(double Omega, double m_abs, double coulomb,
                                               RadialGridPtr grid, RadialEigenOptions opt = {}) {
  const double om2 = 0.25 * Omega * Omega;
  return solve_radial_ground(
      [om2, coulomb](double r) { return om2 * r * r + coulomb / r; }, m_abs, kRelativeMass,
      std::move(grid), opt);
}

/// Relative ground-state energy only (no eigenvector); used by m-scans.
inline double hooke_relative_energy(double Omega, double m_abs, double coulomb, double r_max,
                                    RadialEigenOptions opt = {}) {
  const double om2 = 0.25 * Omega * Omega;
  std::vector<double> energies;
  std::size_t n = opt.mesh_n;
  auto pot = [om2, coulomb](double r) { return om2 * r * r + coulomb / r; };
  energies.push_back(radial_ground_energy_on_mesh(pot, m_abs, kRelativeMass, r_max, n));
  n *= 2;
  energies.push_back(radial_ground_energy_on_mesh(pot, m_abs, kRelativeMass, r_max, n));
  double rich_prev = (4.0 * energies[1] - energies[0]) / 3.0;
  for (int level = 0; level <= opt.max_refinements; ++level) {
    n *= 2;
    energies.push_back(radial_ground_energy_on_mesh(pot, m_abs, kRelativeMass, r_max, n));
    const std::size_t k = energies.size();
    const double rich_cur = (4.0 * energies[k - 1] - energies[k - 2]) / 3.0;
    if (std::abs(rich_cur - rich_prev) <= opt.rel_tol * std::max(std::abs(rich_cur), 1e-12))
      return (16.0 * rich_cur - rich_prev) / 15.0;
    rich_prev = rich_cur;
  }
  std::ostringstream msg;
  msg << "hooke_relative_energy: not converged (Omega=" << Omega << ", m_abs=" << m_abs << ")";
  throw convergence_failure(msg.str());
}

inline GroundState solve_hooke(const SystemParams& p, int m, RadialGridPtr grid,
                               RadialEigenOptions opt = {}) {
  validate(p);
  if (p.kind != SystemKind::hooke) throw std::invalid_argument("solve_hooke: wrong system kind");
  if (!grid || grid->size() == 0) throw std::invalid_argument("solve_hooke: missing grid");

  GroundState gs;
  gs.params = p;
  gs.m = m;
  gs.Omega = effective_frequency(p.omega0, p.omegac);
  gs.m_tilde = std::abs(m);
  gs.cm_exponent = 2.0 * gs.Omega;

  RadialEigenResult rel = hooke_relative_ground(gs.Omega, std::abs(m), 1.0, grid, opt);
  gs.energy = gs.Omega + rel.epsilon0 + 0.5 * p.omegac * m;
  gs.f = std::move(rel.f);
  gs.f_eval = std::move(rel.f_eval);
  return gs;
}

/// Total ground-state energy of the system at quantum number m. ISI is closed
/// form; Hooke goes through the radial eigensolver (energy only).
inline double total_energy(const SystemParams& p, int m, RadialEigenOptions opt = {}) {
  validate(p);
  if (p.kind == SystemKind::isi) return isi_energy(p, m);
  const double Om = effective_frequency(p.omega0, p.omegac);
  return Om + hooke_relative_energy(Om, std::abs(m), 1.0, default_r_max(Om), opt) +
         0.5 * p.omegac * m;
}

inline GroundState solve_ground_state(const SystemParams& p, int m, RadialGridPtr grid,
                                      RadialEigenOptions opt = {}) {
  return p.kind == SystemKind::isi ? solve_isi(p, m, std::move(grid))
                                   : solve_hooke(p, m, std::move(grid), opt);
}

// ---------------------------------------------------------------------------
// Ground-state m selection and m-transition detection.
// ---------------------------------------------------------------------------

/// Scan window {lowest .. 0} for the ground-state quantum number.
struct MWindow {
  int lowest = -32;
};

/// Window depth heuristic: the continuous minimizer of the ISI energy is
/// |m|* = (omegac/2) sqrt(alpha) / omega0, padded by 2. Hooke gets a generous
/// fixed depth; the scan stops early anyway.
inline MWindow default_m_window(const SystemParams& p) {
  if (p.kind == SystemKind::isi) {
    const int depth =
        static_cast<int>(std::ceil(0.5 * p.omegac * std::sqrt(p.alpha) / p.omega0)) + 2;
    return MWindow{-(depth + 4)};
  }
  return MWindow{-40};
}

/// The integer m minimizing the total energy. Scans from m = 0 downward and
/// stops after the energy has increased for two consecutive steps (E is
/// unimodal in |m| for these systems). Positive m never wins for omegac >= 0:
/// it pays the Zeeman term and the same centrifugal cost.
inline int ground_state_m(const SystemParams& p, MWindow window = {},
                          RadialEigenOptions opt = {}) {
  validate(p);
  if (window.lowest == 0) window = default_m_window(p);
  if (window.lowest > 0) throw std::invalid_argument("ground_state_m: window must include 0");
  if (p.kind == SystemKind::isi) {
    const int required =
        static_cast<int>(std::ceil(0.5 * p.omegac * std::sqrt(p.alpha) / p.omega0)) + 2;
    if (-window.lowest < required)
      throw std::invalid_argument("ground_state_m: window shallower than the ISI heuristic bound");
  }

  int best_m = 0;
  double best_e = total_energy(p, 0, opt);
  double prev_e = best_e;
  int rises = 0;
  for (int m = -1; m >= window.lowest; --m) {
    const double e = total_energy(p, m, opt);
    if (e < best_e) {
      best_e = e;
      best_m = m;
    }
    rises = (e > prev_e) ? rises + 1 : 0;
    prev_e = e;
    if (rises >= 2) break;
  }
  if (best_m == window.lowest)
    throw window_too_small("ground_state_m: minimum sits at the window edge");
  return best_m;
}

struct MTransition {
  double omega0_star = 0.0;
  int m_left = 0;  // ground state below omega0_star (larger |m|)
  int m_right = 0; // ground state above omega0_star, |m_left| = |m_right| + 1
};

/// Crossings E(m_left; omega0) = E(m_right; omega0) for consecutive pairs in
/// [m_from, m_to], located by bisection inside [omega0_lo, omega0_hi].
/// Pairs whose crossing lies outside the range are skipped; an omegac = 0
/// system therefore yields an empty list.
inline std::vector<MTransition> m_transition_points(const SystemParams& base, double omega0_lo,
                                                    double omega0_hi, int m_from, int m_to,
                                                    RadialEigenOptions opt = {},
                                                    double tol = 1e-10) {
  if (!(omega0_lo > 0.0) || !(omega0_hi > omega0_lo))
    throw std::invalid_argument("m_transition_points: need 0 < omega0_lo < omega0_hi");
  if (m_from > m_to) std::swap(m_from, m_to);
  std::vector<MTransition> out;
  for (int m = m_from; m < m_to; ++m) {
    // left state m (|m| larger by one than m+1) wins at small omega0
    if (m >= 0) break; // crossings exist only among negative m
    SystemParams pl = base;
    auto g = [&](double w0) {
      SystemParams q = base;
      q.omega0 = w0;
      return total_energy(q, m, opt) - total_energy(q, m + 1, opt);
    };
    const double glo = g(omega0_lo);
    const double ghi = g(omega0_hi);
    if (glo == 0.0) {
      out.push_back({omega0_lo, m, m + 1});
      continue;
    }
    if (!(glo * ghi < 0.0)) continue; // no crossing inside the range
    const double w0s = bisect_root(g, omega0_lo, omega0_hi, tol);
    out.push_back({w0s, m, m + 1});
  }
  std::sort(out.begin(), out.end(),
            [](const MTransition& a, const MTransition& b) { return a.omega0_star < b.omega0_star; });
  return out;
}

struct EnergyPoint {
  double omega0 = 0.0;
  int m = 0;
  double energy = 0.0;
};

/// Dense E(m, omega0) table for figure emission; rows grouped by m, each block
/// sorted by omega0.
inline std::vector<EnergyPoint> energy_landscape(const SystemParams& base,
                                                 const std::vector<double>& omega0_grid,
                                                 const std::vector<int>& m_list,
                                                 RadialEigenOptions opt = {}, int threads = 1) {
  std::vector<EnergyPoint> rows(omega0_grid.size() * m_list.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const int m = m_list[i / omega0_grid.size()];
    const double w0 = omega0_grid[i % omega0_grid.size()];
    SystemParams q = base;
    q.omega0 = w0;
    rows[i] = {w0, m, total_energy(q, m, opt)};
  });
  return rows;
}

} // namespace qmetric
