// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Returns the number of failed
// criteria. The default ISI and Hooke sweeps are computed once (criterion 1)
// and reused by the later criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "qmetric/experiments.hpp"

using namespace qmetric;

namespace {

FamilyRun g_isi;
FamilyRun g_hooke;

FamilySpec isi_default_spec() {
  FamilySpec spec;
  spec.base = SystemParams{SystemKind::isi, 0.62, 5.5, 5.0};
  spec.omega0_values = make_omega0_range(0.40, 1.10, 0.005);
  spec.reference_omega0 = 0.62;
  return spec;
}

FamilySpec hooke_default_spec() {
  FamilySpec spec;
  spec.base = SystemParams{SystemKind::hooke, 0.5, 5.0, 0.0};
  spec.omega0_values = make_omega0_range(0.30, 0.90, 0.005);
  spec.reference_omega0 = 0.50;
  return spec;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

bool run_criterion(int num, const std::string& name, double budget_s,
                   const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ok && budget_s > 0.0 && secs > budget_s) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("exceeded ") + fmt(budget_s) +
              " s budget";
  }
  std::printf("%s criterion-%02d %-22s (%6.1f s)  %s\n", ok ? "PASS" : "FAIL", num, name.c_str(),
              secs, detail.c_str());
  std::fflush(stdout);
  return ok;
}

// --------------------------------------------------------------------------

bool conservation_suite(std::string& detail) {
  g_isi = run_family_detailed(isi_default_spec());
  g_hooke = run_family_detailed(hooke_default_spec());
  double worst = 0.0;
  std::size_t n_states = 0;
  for (const FamilyRun* run : {&g_isi, &g_hooke}) {
    for (std::size_t i = 0; i < run->records.size(); ++i) {
      if (run->records[i].status != RecordStatus::ok) {
        detail = "failed point at omega0 = " + fmt(run->records[i].omega0) + ": " +
                 run->records[i].failure;
        return false;
      }
      const ConservationReport& rep = run->conservation[i];
      const double m = run->states[i].m;
      worst = std::max({worst, std::abs(rep.n_integral - 2.0) / 2.0,
                        std::abs(rep.lz_integral - m) / std::max(1.0, std::abs(m)),
                        std::abs(rep.abs_lz_integral - std::abs(m)) / std::max(1.0, std::abs(m))});
      if (!rep.pass) {
        detail = "conservation failed at omega0 = " + fmt(run->records[i].omega0);
        return false;
      }
      ++n_states;
    }
  }
  detail = std::to_string(n_states) + " states, worst relative deviation " + fmt(worst);
  return worst < 1e-6;
}

bool shell_radii(std::string& detail) {
  double worst_psi = 0.0;
  double worst_rho = 0.0;
  double worst_jp = 0.0;
  std::size_t n_states = 0;
  std::vector<int> shells;
  for (const FamilyRun* run : {&g_isi, &g_hooke}) {
    for (std::size_t i = 0; i < run->states.size(); ++i) {
      if (run->records[i].status != RecordStatus::ok) continue;
      worst_psi =
          std::max(worst_psi, std::abs(d_psi_to_zero(run->states[i]) - std::numbers::sqrt2));
      worst_rho = std::max(worst_rho, std::abs(d_rho_to_zero(run->densities[i]) - 2.0));
      worst_jp = std::max(worst_jp, std::abs(d_jp_to_zero(run->currents[i]) -
                                             std::abs(run->states[i].m)));
      ++n_states;
      if (std::find(shells.begin(), shells.end(), run->states[i].m) == shells.end())
        shells.push_back(run->states[i].m);
    }
  }
  detail = std::to_string(n_states) + " states over " + std::to_string(shells.size()) +
           " shells; dev psi " + fmt(worst_psi) + ", rho " + fmt(worst_rho) + ", jp " +
           fmt(worst_jp);
  return n_states >= 20 && shells.size() >= 5 && worst_psi < 1e-8 && worst_rho < 1e-6 &&
         worst_jp < 1e-6;
}

bool metric_axioms(std::string& detail) {
  std::mt19937_64 rng(20240817);
  const double slack = 1e-9 + 1e-6; // triangle slack plus quadrature tolerance
  int bad = 0;
  int checked = 0;
  for (const FamilyRun* run : {&g_isi, &g_hooke}) {
    std::vector<std::size_t> ok_idx;
    for (std::size_t i = 0; i < run->records.size(); ++i)
      if (run->records[i].status == RecordStatus::ok) ok_idx.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, ok_idx.size() - 1);
    for (int t = 0; t < 250; ++t) {
      const std::size_t i = ok_idx[pick(rng)];
      const std::size_t j = ok_idx[pick(rng)];
      const std::size_t k = ok_idx[pick(rng)];
      ++checked;
      // non-negativity, identity, bitwise symmetry, triangle for all three
      const double pij = d_psi(run->states[i], run->states[j]);
      if (!(pij >= 0.0) || pij != d_psi(run->states[j], run->states[i]) ||
          d_psi(run->states[i], run->states[i]) != 0.0 ||
          pij > d_psi(run->states[i], run->states[k]) + d_psi(run->states[k], run->states[j]) +
                    slack)
        ++bad;
      const double rij = d_rho(run->densities[i], run->densities[j]);
      if (!(rij >= 0.0) || rij != d_rho(run->densities[j], run->densities[i]) ||
          d_rho(run->densities[i], run->densities[i]) != 0.0 ||
          rij > d_rho(run->densities[i], run->densities[k]) +
                    d_rho(run->densities[k], run->densities[j]) + slack)
        ++bad;
      const double jij = d_jp(run->currents[i], run->currents[j]);
      if (!(jij >= 0.0) || jij != d_jp(run->currents[j], run->currents[i]) ||
          d_jp(run->currents[i], run->currents[i]) != 0.0 ||
          jij > d_jp(run->currents[i], run->currents[k]) +
                    d_jp(run->currents[k], run->currents[j]) + slack)
        ++bad;
    }
  }
  detail = std::to_string(checked) + " triples x 3 metrics, " + std::to_string(bad) +
           " violations";
  return bad == 0;
}

bool solver_oracles(std::string& detail) {
  double worst_isi = 0.0;
  for (int m : {0, -2, -7}) {
    for (double alpha : {1.0, 5.0, 9.0}) {
      for (double Om : {0.5, 1.0, 2.5}) {
        const double closed = Om * (std::sqrt(static_cast<double>(m) * m + alpha) + 1.0);
        const auto res = solve_radial_ground(
            [Om, alpha](double r) { return 0.25 * Om * Om * r * r + alpha / (r * r); },
            std::abs(m), kRelativeMass, make_radial_grid(256, default_r_max(Om)));
        worst_isi = std::max(worst_isi, std::abs(res.epsilon0 - closed) / closed);
      }
    }
  }
  double worst_hooke = 0.0;
  for (int m_abs : {0, 1, 5}) {
    const double Om = 1.0 / (2.0 * m_abs + 1.0);
    const double closed = Om * (m_abs + 2.0);
    const double eps = hooke_relative_energy(Om, m_abs, 1.0, default_r_max(Om));
    worst_hooke = std::max(worst_hooke, std::abs(eps - closed) / std::max(1.0, closed));
  }
  detail = "ISI 27-point lattice dev " + fmt(worst_isi) + "; ansatz points dev " +
           fmt(worst_hooke);
  return worst_isi < 1e-8 && worst_hooke < 1e-8;
}

bool reference_reproduction(std::string& detail) {
  const int m_isi = ground_state_m(SystemParams{SystemKind::isi, 0.62, 5.5, 5.0});
  const int m_hooke = ground_state_m(SystemParams{SystemKind::hooke, 0.5, 5.0, 0.0});
  detail = "ISI auto-m = " + std::to_string(m_isi) + ", Hooke auto-m = " + std::to_string(m_hooke);
  return m_isi == -10 && m_hooke == -5;
}

bool crossing_points(std::string& detail) {
  const auto list =
      m_transition_points(SystemParams{SystemKind::isi, 0.62, 5.5, 5.0}, 0.55, 0.80, -11, -7);
  double w10 = 0.0;
  double w9 = 0.0;
  for (const MTransition& t : list) {
    if (t.m_left == -10 && t.m_right == -9) w10 = t.omega0_star;
    if (t.m_left == -9 && t.m_right == -8) w9 = t.omega0_star;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < g_isi.records.size(); ++i)
    if (g_isi.records[i].m < g_isi.records[i - 1].m) monotone = false; // |m| must not grow
  detail = "omega0*(-10,-9) = " + fmt(w10) + ", omega0*(-9,-8) = " + fmt(w9) +
           (monotone ? "; |m| non-increasing" : "; |m| ordering violated");
  return std::abs(w10 - 0.6482) < 1e-3 && std::abs(w9 - 0.7245) < 1e-3 && monotone;
}

bool psi_gap_law(std::string& detail) {
  double worst_gap = 0.0;
  double max_within = 0.0;
  for (const FamilyRun* run : {&g_isi, &g_hooke}) {
    for (std::size_t i = 0; i < run->records.size(); ++i) {
      const DistanceRecord& r = run->records[i];
      if (r.status != RecordStatus::ok || r.branch == Branch::reference) continue;
      if (r.m != run->reference_m) {
        worst_gap = std::max(worst_gap, std::abs(r.d_psi - 2.0));
      } else {
        max_within = std::max(max_within, r.d_psi);
        if (!(r.d_psi < 2.0)) {
          detail = "within-shell d_psi reached 2";
          return false;
        }
      }
    }
  }
  detail = "cross-shell |d_psi - 2| <= " + fmt(worst_gap) + "; within-shell max " +
           fmt(max_within);
  return worst_gap <= 1e-12;
}

bool band_trends(std::string& detail) {
  FamilySpec spec = isi_default_spec();
  spec.omega0_values = {0.40, 1.13}; // search range completing the outermost shells
  const BandAnalysis res = band_analysis(spec, -14, -6);
  if (res.bands.size() != 9) {
    detail = "expected 9 shells, got " + std::to_string(res.bands.size());
    return false;
  }
  auto band = [&](int m) -> const BandSummary& {
    for (const BandSummary& b : res.bands)
      if (b.m == m) return b;
    throw std::runtime_error("missing shell");
  };
  bool ok = band(-10).theta_min < 1e-6;
  // |m| rising from the reference: theta extremes move away from the pole,
  // bandwidth shrinks across shells -11 .. -14
  for (int k = 10; k < 14; ++k) {
    ok = ok && band(-(k + 1)).theta_min > band(-k).theta_min;
    ok = ok && band(-(k + 1)).theta_max > band(-k).theta_max;
    if (k > 10) ok = ok && band(-(k + 1)).delta_theta < band(-k).delta_theta;
  }
  // |m| falling from the reference: extremes move away, bandwidth grows
  // across shells -9 .. -6
  for (int k = 10; k > 6; --k) {
    ok = ok && band(-(k - 1)).theta_min > band(-k).theta_min;
    ok = ok && band(-(k - 1)).theta_max > band(-k).theta_max;
    if (k < 10) ok = ok && band(-(k - 1)).delta_theta > band(-k).delta_theta;
  }
  std::ostringstream os;
  os << "theta_min by shell:";
  for (const BandSummary& b : res.bands) os << " " << fmt(b.theta_min);
  detail = os.str();
  return ok;
}

bool mapping_diagnostics(std::string& detail) {
  const MappingReport isi = hk_mapping_report(g_isi.records);
  const MappingReport hooke = hk_mapping_report(g_hooke.records);
  const bool monotone = isi.below.monotone_rho_vs_psi && isi.above.monotone_rho_vs_psi &&
                        hooke.below.monotone_rho_vs_psi && hooke.above.monotone_rho_vs_psi;
  detail = "rho-vs-psi monotone: " + std::string(monotone ? "yes" : "NO") +
           "; ISI jp branch separation " + fmt(isi.branch_separation);
  return monotone && isi.separation_defined && isi.branch_separation > 0.0;
}

bool triangle_bound_sweeps(std::string& detail) {
  double worst = -1e9;
  for (const FamilyRun* run : {&g_isi, &g_hooke}) {
    for (std::size_t i = 0; i < run->currents.size(); ++i) {
      if (run->records[i].status != RecordStatus::ok) continue;
      for (std::size_t j = i; j < run->currents.size(); ++j) {
        if (run->records[j].status != RecordStatus::ok) continue;
        const double d = d_jp(run->currents[i], run->currents[j]);
        worst = std::max(worst, d - triangle_bound(run->states[i].m, run->states[j].m));
      }
    }
  }
  detail = "max (d_jp - |m1| - |m2|) = " + fmt(worst);
  return worst <= 1e-9;
}

bool determinism(std::string& detail) {
  const std::string cli = QMETRIC_CLI_PATH;
  const std::string flags =
      " sweep --system isi --omegac 5.5 --alpha 5 --omega0-min 0.55 --omega0-max 0.75"
      " --omega0-step 0.01 --reference 0.62 --grid-n 2000 --inner-n 400 --angular-n 64";
  auto run_one = [&](int threads, const std::string& out) {
    const std::string cmd = "QMETRIC_THREADS=" + std::to_string(threads) + " '" + cli + "'" +
                            flags + " --out " + out + " > /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  if (run_one(1, "acceptance_det_t1.csv") != 0) {
    detail = "single-thread run failed";
    return false;
  }
  if (run_one(8, "acceptance_det_t8.csv") != 0) {
    detail = "eight-thread run failed";
    return false;
  }
  std::ifstream a("acceptance_det_t1.csv", std::ios::binary);
  std::ifstream b("acceptance_det_t8.csv", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  detail = std::to_string(sa.size()) + " bytes, " +
           (sa == sb ? "byte-identical" : "outputs differ");
  return !sa.empty() && sa == sb;
}

} // namespace

int main() {
  int failures = 0;
  auto crit = [&](int num, const char* name, double budget_s,
                  const std::function<bool(std::string&)>& body) {
    if (!run_criterion(num, name, budget_s, body)) ++failures;
  };

  crit(1, "conservation-suite", 300.0, conservation_suite);
  crit(2, "onion-shell-radii", 60.0, shell_radii);
  crit(3, "metric-axioms", 60.0, metric_axioms);
  crit(4, "solver-oracles", 60.0, solver_oracles);
  crit(5, "reference-states", 60.0, reference_reproduction);
  crit(6, "m-crossings", 60.0, crossing_points);
  crit(7, "psi-gap-law", 60.0, psi_gap_law);
  crit(8, "band-trends", 600.0, band_trends);
  crit(9, "mapping-diagnostics", 60.0, mapping_diagnostics);
  crit(10, "triangle-bound", 60.0, triangle_bound_sweeps);
  crit(11, "csv-determinism", 600.0, determinism);

  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures;
}
