#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/observables.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/qm_metric.hpp"
#include "qmetric/systems.hpp"

namespace qmetric {

enum class RescaleConvention { pair_max, family_max };
enum class Branch { below_ref, above_ref, reference };

/// A family of ground states produced by sweeping omega0 with everything else
/// held fixed, plus the numerical configuration of the sweep.
struct FamilySpec {
  SystemParams base;                  // omega0 is taken per point
  std::vector<double> omega0_values;  // strictly positive; need not be sorted
  double reference_omega0 = 0.0;
  bool auto_m = true;
  std::optional<int> fixed_m;         // used when auto_m is false
  RescaleConvention rescale = RescaleConvention::pair_max;
  std::size_t grid_n = 2000;
  std::size_t inner_n = 400;
  std::size_t angular_n = 64;
  RadialEigenOptions eig;
  int threads = 0; // 0 = resolve from QMETRIC_THREADS / hardware
};

inline std::vector<double> make_omega0_range(double lo, double hi, double step) {
  if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0))
    throw std::invalid_argument("make_omega0_range: need 0 < lo <= hi and step > 0");
  std::vector<double> v;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(lo + static_cast<double>(i) * step);
  return v;
}

enum class RecordStatus { ok, failed };

/// One family member measured against the reference state.
struct DistanceRecord {
  double omega0 = 0.0;
  int m = 0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  double d_psi = std::numeric_limits<double>::quiet_NaN();
  double d_rho = std::numeric_limits<double>::quiet_NaN();
  double d_jp = std::numeric_limits<double>::quiet_NaN();
  double d_jp_rescaled = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN(); // radians; NaN when m*m_ref = 0
  Branch branch = Branch::reference;
  RecordStatus status = RecordStatus::ok;
  std::string failure; // empty when ok
};

/// Family sweep with all intermediate objects retained (for invariant suites).
struct FamilyRun {
  std::vector<DistanceRecord> records; // sorted by omega0
  std::vector<GroundState> states;     // aligned with records
  std::vector<DensityProfile> densities;
  std::vector<CurrentProfile> currents;
  std::vector<ConservationReport> conservation;
  std::size_t reference_index = 0;
  int reference_m = 0;
  RadialGridPtr grid;
  InnerRule inner;
};

/// D_{j_p} rescaling conventions for figure axes. pair_max divides by the
/// triangle bound |m| + |m_ref|; family_max by the largest distance realized
/// in the family.
inline double rescale_djp(double d_jp_value, int m, int m_ref, RescaleConvention conv,
                          double family_max = std::numeric_limits<double>::quiet_NaN()) {
  if (conv == RescaleConvention::pair_max) {
    const double denom = triangle_bound(m, m_ref);
    if (denom == 0.0)
      throw std::domain_error("rescale_djp: pair-max undefined for m = m_ref = 0");
    return d_jp_value / denom;
  }
  if (!(family_max > 0.0))
    throw std::domain_error("rescale_djp: family-max undefined (no nonzero distance)");
  return d_jp_value / family_max;
}

namespace detail {

struct FamilyGeometry {
  RadialGridPtr grid;
  InnerRule inner;
};

inline FamilyGeometry family_geometry(const FamilySpec& spec, double omega0_min) {
  SystemParams p0 = spec.base;
  p0.omega0 = omega0_min;
  validate(p0);
  const double omega_min = effective_frequency(omega0_min, spec.base.omegac);
  const double r_max = default_r_max(omega_min);
  FamilyGeometry g;
  g.grid = make_radial_grid(spec.grid_n, r_max);
  g.inner = InnerRule{make_radial_grid(spec.inner_n, r_max), build_angular_rule(spec.angular_n)};
  return g;
}

inline int select_m(const FamilySpec& spec, double omega0) {
  SystemParams q = spec.base;
  q.omega0 = omega0;
  if (!spec.auto_m) {
    if (!spec.fixed_m) throw std::invalid_argument("FamilySpec: fixed_m required when auto_m off");
    return *spec.fixed_m;
  }
  return ground_state_m(q, {}, spec.eig);
}

} // namespace detail

/// Solve the family, build observables, verify conservation per point and
/// record the three distances to the reference state. Failed points are
/// tagged, never dropped.
inline FamilyRun run_family_detailed(const FamilySpec& spec) {
  if (spec.omega0_values.empty())
    throw std::invalid_argument("run_family: empty omega0 sweep");
  for (double w0 : spec.omega0_values)
    if (!(w0 > 0.0)) throw std::invalid_argument("run_family: omega0 values must be positive");

  std::vector<double> sweep = spec.omega0_values;
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              sweep.end());
  if (spec.reference_omega0 < sweep.front() - 1e-12 ||
      spec.reference_omega0 > sweep.back() + 1e-12)
    throw std::invalid_argument("run_family: reference omega0 outside the sweep range");
  const bool have_ref = std::any_of(sweep.begin(), sweep.end(), [&](double w0) {
    return std::abs(w0 - spec.reference_omega0) < 1e-12;
  });
  if (!have_ref) {
    sweep.push_back(spec.reference_omega0);
    std::sort(sweep.begin(), sweep.end());
  }

  FamilyRun run;
  auto geo = detail::family_geometry(spec, sweep.front());
  run.grid = geo.grid;
  run.inner = geo.inner;

  // Reference state first; a broken reference poisons the whole family.
  const int m_ref = detail::select_m(spec, spec.reference_omega0);
  SystemParams pref = spec.base;
  pref.omega0 = spec.reference_omega0;
  const GroundState ref_state = solve_ground_state(pref, m_ref, run.grid, spec.eig);
  const int threads = resolve_thread_count(spec.threads);
  const ProfilePair ref_profiles = make_profiles(ref_state, run.grid, run.inner, threads);
  {
    const ConservationReport rep =
        check_conservation(ref_state, ref_profiles.density, ref_profiles.current);
    if (!rep.pass) throw accuracy_failure("run_family: reference state fails conservation");
  }
  run.reference_m = m_ref;

  const std::size_t n = sweep.size();
  run.records.resize(n);
  run.states.resize(n);
  run.densities.resize(n);
  run.currents.resize(n);
  run.conservation.resize(n);

  parallel_for(n, spec.threads, [&](std::size_t i) {
    DistanceRecord& rec = run.records[i];
    rec.omega0 = sweep[i];
    const double dw = sweep[i] - spec.reference_omega0;
    rec.branch = std::abs(dw) < 1e-12 ? Branch::reference
                                      : (dw < 0.0 ? Branch::below_ref : Branch::above_ref);
    try {
      const bool is_ref = rec.branch == Branch::reference;
      const int m = is_ref ? m_ref : detail::select_m(spec, sweep[i]);
      rec.m = m;
      SystemParams q = spec.base;
      q.omega0 = sweep[i];
      const GroundState gs =
          is_ref ? ref_state : solve_ground_state(q, m, run.grid, spec.eig);
      rec.energy = gs.energy;
      const ProfilePair prof =
          is_ref ? ref_profiles : make_profiles(gs, run.grid, run.inner, 1);
      const ConservationReport rep = check_conservation(gs, prof.density, prof.current);
      run.conservation[i] = rep;
      if (!rep.pass) {
        rec.status = RecordStatus::failed;
        rec.failure = "conservation-check-failed";
      } else {
        rec.d_psi = d_psi(ref_state, gs);
        rec.d_rho = d_rho(ref_profiles.density, prof.density);
        rec.d_jp = d_jp(ref_profiles.current, prof.current);
        if (m != 0 && m_ref != 0) rec.theta = sphere_angle(m_ref, m, rec.d_jp);
        if (spec.rescale == RescaleConvention::pair_max && triangle_bound(m, m_ref) > 0.0)
          rec.d_jp_rescaled = rescale_djp(rec.d_jp, m, m_ref, RescaleConvention::pair_max);
      }
      run.states[i] = gs;
      run.densities[i] = prof.density;
      run.currents[i] = prof.current;
    } catch (const std::exception& e) {
      rec.status = RecordStatus::failed;
      rec.failure = e.what();
    }
  });

  if (spec.rescale == RescaleConvention::family_max) {
    double fam_max = 0.0;
    for (const DistanceRecord& r : run.records)
      if (r.status == RecordStatus::ok && std::isfinite(r.d_jp)) fam_max = std::max(fam_max, r.d_jp);
    for (DistanceRecord& r : run.records)
      if (r.status == RecordStatus::ok && fam_max > 0.0) r.d_jp_rescaled = r.d_jp / fam_max;
  }

  for (std::size_t i = 0; i < n; ++i)
    if (run.records[i].branch == Branch::reference) run.reference_index = i;
  return run;
}

inline std::vector<DistanceRecord> run_family(const FamilySpec& spec) {
  return run_family_detailed(spec).records;
}

// ---------------------------------------------------------------------------
// Band geometry: for each shell |m|, the omega0 interval on which m is the
// ground state, and the extreme polar angles realized there.
// ---------------------------------------------------------------------------

struct BandSummary {
  int m = 0;
  double omega0_lo = 0.0;
  double omega0_hi = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double delta_theta = 0.0;
};

struct BandAnalysis {
  std::vector<BandSummary> bands;    // sorted by m ascending
  std::vector<int> skipped_shells;   // empty validity interval inside the range
  int reference_m = 0;
};

/// Sweep each shell in [m_from, m_to] over its ground-state validity interval
/// and report theta_min / theta_max / delta_theta against the family's
/// reference current. The scan starts at >= 32 points per interval and
/// nested-refines until the extremes move by less than theta_tol.
inline BandAnalysis band_analysis(const FamilySpec& spec, int m_from, int m_to,
                                  std::size_t scan_points = 33, double theta_tol = 1e-3,
                                  int max_scan_refinements = 4) {
  if (m_from > m_to) std::swap(m_from, m_to);
  if (spec.omega0_values.empty()) throw std::invalid_argument("band_analysis: empty sweep range");
  if (scan_points < 32) scan_points = 32;

  const double range_lo = *std::min_element(spec.omega0_values.begin(), spec.omega0_values.end());
  const double range_hi = *std::max_element(spec.omega0_values.begin(), spec.omega0_values.end());

  auto geo = detail::family_geometry(spec, range_lo);
  const int threads = resolve_thread_count(spec.threads);

  BandAnalysis out;
  const int m_ref = detail::select_m(spec, spec.reference_omega0);
  out.reference_m = m_ref;
  if (m_ref == 0)
    throw undefined_angle("band_analysis: reference shell |m| = 0 has no sphere geometry");
  SystemParams pref = spec.base;
  pref.omega0 = spec.reference_omega0;
  const GroundState ref_state = solve_ground_state(pref, m_ref, geo.grid, spec.eig);
  const CurrentProfile ref_cur =
      make_profiles(ref_state, geo.grid, geo.inner, threads).current;

  // Shell validity boundaries from the m-transition crossings.
  auto crossing = [&](int k) -> std::optional<double> {
    // boundary between shells |m| = k and k-1; nullopt when outside the range
    if (k <= 0) return std::nullopt;
    const auto list =
        m_transition_points(spec.base, range_lo, range_hi, -k, -k + 1, spec.eig);
    if (list.empty()) return std::nullopt;
    return list.front().omega0_star;
  };
  auto ground_at = [&](double w0) {
    SystemParams q = spec.base;
    q.omega0 = w0;
    return ground_state_m(q, {}, spec.eig);
  };

  for (int m = m_from; m <= m_to; ++m) {
    if (m == 0) continue; // no sphere angle on the |m| = 0 shell
    const int k = std::abs(m);
    const auto lo_cross = crossing(k + 1);
    const auto hi_cross = crossing(k);
    double lo = lo_cross.value_or(range_lo);
    double hi = hi_cross.value_or(range_hi);
    lo = std::max(lo, range_lo);
    hi = std::min(hi, range_hi);
    if (!(lo < hi)) {
      out.skipped_shells.push_back(m);
      continue;
    }
    // When a boundary was clipped to the range edge, make sure the shell
    // actually owns that edge.
    const double width = hi - lo;
    const double nudge = 1e-7 * width;
    if (!lo_cross && ground_at(lo + nudge) != m) {
      out.skipped_shells.push_back(m);
      continue;
    }
    if (!hi_cross && ground_at(hi - nudge) != m) {
      out.skipped_shells.push_back(m);
      continue;
    }

    // Nested theta scan over the interval; endpoints pinned (nudged inside).
    std::map<double, double> theta_at; // omega0 -> theta
    auto eval_points = [&](const std::vector<double>& pts) {
      std::vector<double> todo;
      for (double w0 : pts)
        if (!theta_at.count(w0)) todo.push_back(w0);
      std::vector<double> th(todo.size());
      parallel_for(todo.size(), spec.threads, [&](std::size_t i) {
        SystemParams q = spec.base;
        q.omega0 = todo[i];
        const GroundState gs = solve_ground_state(q, m, geo.grid, spec.eig);
        const CurrentProfile cur = make_profiles(gs, geo.grid, geo.inner, 1).current;
        th[i] = sphere_angle(m_ref, m, d_jp(ref_cur, cur));
      });
      for (std::size_t i = 0; i < todo.size(); ++i) theta_at[todo[i]] = th[i];
    };

    std::vector<double> pts;
    for (std::size_t i = 0; i < scan_points; ++i)
      pts.push_back(lo + nudge +
                    (width - 2.0 * nudge) * static_cast<double>(i) /
                        static_cast<double>(scan_points - 1));
    if (m == m_ref && spec.reference_omega0 > lo && spec.reference_omega0 < hi)
      pts.push_back(spec.reference_omega0);
    eval_points(pts);

    auto extremes = [&]() {
      double tmin = std::numeric_limits<double>::infinity();
      double tmax = -std::numeric_limits<double>::infinity();
      for (const auto& [w0, th] : theta_at) {
        tmin = std::min(tmin, th);
        tmax = std::max(tmax, th);
      }
      return std::pair<double, double>{tmin, tmax};
    };

    auto [tmin, tmax] = extremes();
    for (int level = 0; level < max_scan_refinements; ++level) {
      // midpoints of the current point set
      std::vector<double> keys;
      for (const auto& [w0, th] : theta_at) keys.push_back(w0);
      std::vector<double> mids;
      for (std::size_t i = 0; i + 1 < keys.size(); ++i) mids.push_back(0.5 * (keys[i] + keys[i + 1]));
      eval_points(mids);
      auto [nmin, nmax] = extremes();
      const bool settled = std::abs(nmin - tmin) < theta_tol && std::abs(nmax - tmax) < theta_tol;
      tmin = nmin;
      tmax = nmax;
      if (settled) break;
    }

    BandSummary band;
    band.m = m;
    band.omega0_lo = lo;
    band.omega0_hi = hi;
    band.theta_min = tmin;
    band.theta_max = tmax;
    band.delta_theta = tmax - tmin;
    out.bands.push_back(band);
  }
  std::sort(out.bands.begin(), out.bands.end(),
            [](const BandSummary& a, const BandSummary& b) { return a.m < b.m; });
  return out;
}

// ---------------------------------------------------------------------------
// Mapping diagnostics: monotonicity of distance-vs-distance curves per sweep
// branch, and the separation between the increasing- and decreasing-omega0
// branches of the D_jp vs D_psi curve.
// ---------------------------------------------------------------------------

struct BranchDiagnostics {
  std::size_t count = 0;
  bool sufficient = false; // at least 3 records
  bool monotone_rho_vs_psi = false;
  bool monotone_jp_vs_psi = false;
  bool monotone_jp_vs_rho = false;
  double spearman_rho_vs_psi = 0.0;
  double spearman_jp_vs_psi = 0.0;
  double spearman_jp_vs_rho = 0.0;
};

struct MappingReport {
  BranchDiagnostics below;
  BranchDiagnostics above;
  bool separation_defined = false;
  double branch_separation = 0.0; // max |d_jp gap| at matched d_psi inside the reference shell
};

namespace detail {

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size(), 0.0);
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 1.0; // constant sequence: trivially monotone
  return sxy / std::sqrt(sxx * syy);
}

// pairwise monotone non-decreasing: x_i < x_j implies y_i <= y_j (+ slack)
inline bool pairwise_monotone(const std::vector<double>& x, const std::vector<double>& y,
                              double x_tie = 1e-12, double y_slack = 1e-9) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] - x[i] > x_tie && y[j] < y[i] - y_slack) return false;
  return true;
}

} // namespace detail

/// Monotonicity/branch diagnostics over a sweep's records. The reference
/// record (all distances zero) anchors both branches.
inline MappingReport hk_mapping_report(const std::vector<DistanceRecord>& records) {
  std::vector<const DistanceRecord*> below;
  std::vector<const DistanceRecord*> above;
  const DistanceRecord* ref = nullptr;
  int m_ref = 0;
  for (const DistanceRecord& r : records) {
    if (r.status != RecordStatus::ok) continue;
    switch (r.branch) {
      case Branch::below_ref: below.push_back(&r); break;
      case Branch::above_ref: above.push_back(&r); break;
      case Branch::reference:
        ref = &r;
        m_ref = r.m;
        break;
    }
  }

  auto diagnose = [&](std::vector<const DistanceRecord*> branch) {
    BranchDiagnostics d;
    if (ref) branch.push_back(ref);
    d.count = branch.size();
    d.sufficient = branch.size() >= 3;
    if (!d.sufficient) return d;
    std::vector<double> psi;
    std::vector<double> rho;
    std::vector<double> jp;
    for (const DistanceRecord* r : branch) {
      psi.push_back(r->d_psi);
      rho.push_back(r->d_rho);
      jp.push_back(r->d_jp);
    }
    d.monotone_rho_vs_psi = detail::pairwise_monotone(psi, rho);
    d.monotone_jp_vs_psi = detail::pairwise_monotone(psi, jp);
    d.monotone_jp_vs_rho = detail::pairwise_monotone(rho, jp);
    d.spearman_rho_vs_psi = detail::spearman(psi, rho);
    d.spearman_jp_vs_psi = detail::spearman(psi, jp);
    d.spearman_jp_vs_rho = detail::spearman(rho, jp);
    return d;
  };

  MappingReport rep;
  rep.below = diagnose(below);
  rep.above = diagnose(above);

  // Branch separation of the D_jp(D_psi) curves, measured where the mapping
  // is single-valued: inside the reference shell (m == m_ref), where d_psi
  // grows continuously from 0.
  auto shell_curve = [&](const std::vector<const DistanceRecord*>& branch) {
    std::vector<std::pair<double, double>> pts;
    if (ref) pts.push_back({0.0, 0.0});
    for (const DistanceRecord* r : branch)
      if (r->m == m_ref) pts.push_back({r->d_psi, r->d_jp});
    std::sort(pts.begin(), pts.end());
    return pts;
  };
  auto interp = [](const std::vector<std::pair<double, double>>& pts, double x) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      if (x >= pts[i].first && x <= pts[i + 1].first) {
        const double t = (pts[i + 1].first == pts[i].first)
                             ? 0.0
                             : (x - pts[i].first) / (pts[i + 1].first - pts[i].first);
        return pts[i].second + t * (pts[i + 1].second - pts[i].second);
      }
    return pts.back().second;
  };
  const auto cb = shell_curve(below);
  const auto ca = shell_curve(above);
  if (ref && cb.size() >= 2 && ca.size() >= 2) {
    const double xmax = std::min(cb.back().first, ca.back().first);
    double gap = 0.0;
    for (const auto& [x, y] : cb)
      if (x <= xmax) gap = std::max(gap, std::abs(y - interp(ca, x)));
    for (const auto& [x, y] : ca)
      if (x <= xmax) gap = std::max(gap, std::abs(y - interp(cb, x)));
    rep.separation_defined = true;
    rep.branch_separation = gap;
  }
  return rep;
}

} // namespace qmetric
