// qmetric command line: ground-state solving, phase diagrams, distance sweeps,
// band geometry and the invariant-check runner for two-electron quantum dots
// in a uniform magnetic field (symmetric gauge, atomic units).
//
// Exit codes: 0 success, 1 computational failure, 2 usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qmetric/experiments.hpp"
#include "qmetric/format.hpp"
#include "qmetric/mc_oracle.hpp"

namespace {

using namespace qmetric;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct NumericFlags {
  std::size_t grid_n = 2000;
  std::size_t inner_n = 400;
  std::size_t angular_n = 64;
  std::size_t mesh_n = 4000;
  int threads = 0; // 0: QMETRIC_THREADS env, then hardware
};

void add_numeric_flags(CLI::App* cmd, NumericFlags& nf) {
  cmd->add_option("--grid-n", nf.grid_n, "radial quadrature nodes for profiles/metrics")
      ->capture_default_str();
  cmd->add_option("--inner-n", nf.inner_n, "radial nodes of the inner convolution rule")
      ->capture_default_str();
  cmd->add_option("--angular-n", nf.angular_n, "angular nodes of the inner convolution rule")
      ->capture_default_str();
  cmd->add_option("--mesh-n", nf.mesh_n, "base uniform mesh of the radial eigensolver")
      ->capture_default_str();
  cmd->add_option("--threads", nf.threads,
                  "worker threads (0: QMETRIC_THREADS env var, then hardware)")
      ->capture_default_str();
}

RadialEigenOptions eig_options(const NumericFlags& nf) {
  RadialEigenOptions opt;
  opt.mesh_n = nf.mesh_n;
  return opt;
}

struct SystemFlags {
  std::string system = "isi";
  double omega0 = kNaN;
  double omegac = kNaN;
  double alpha = kNaN;
};

void add_system_flags(CLI::App* cmd, SystemFlags& sf, bool with_omega0) {
  cmd->add_option("--system", sf.system, "model system")
      ->check(CLI::IsMember({"hooke", "isi"}))
      ->capture_default_str();
  if (with_omega0) cmd->add_option("--omega0", sf.omega0, "confinement frequency (a.u.)");
  cmd->add_option("--omegac", sf.omegac, "cyclotron frequency (a.u.)");
  cmd->add_option("--alpha", sf.alpha, "inverse-square interaction strength (ISI)");
}

SystemParams resolve_params(const SystemFlags& sf) {
  SystemParams p;
  p.kind = sf.system == "hooke" ? SystemKind::hooke : SystemKind::isi;
  p.omega0 = std::isnan(sf.omega0) ? (p.kind == SystemKind::isi ? 0.62 : 0.5) : sf.omega0;
  p.omegac = std::isnan(sf.omegac) ? (p.kind == SystemKind::isi ? 5.5 : 5.0) : sf.omegac;
  p.alpha = std::isnan(sf.alpha) ? (p.kind == SystemKind::isi ? 5.0 : 0.0) : sf.alpha;
  validate(p);
  return p;
}

const char* kind_name(SystemKind k) { return k == SystemKind::hooke ? "hooke" : "isi"; }

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

void write_params_header(std::ostream& out, const SystemParams& p, const NumericFlags& nf) {
  out << "# system = " << kind_name(p.kind) << "\n";
  out << "# omegac = " << format_sig12(p.omegac) << "\n";
  if (p.kind == SystemKind::isi) out << "# alpha = " << format_sig12(p.alpha) << "\n";
  out << "# grid_n = " << nf.grid_n << ", inner_n = " << nf.inner_n
      << ", angular_n = " << nf.angular_n << ", mesh_n = " << nf.mesh_n << "\n";
  out << "# units: atomic (hbar = m_e = e = 1); B = omegac z_hat, symmetric gauge\n";
  out << "# sign convention: m < 0 gives j_phi < 0 (clockwise viewed from +z)\n";
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::below_ref: return "below-ref";
    case Branch::above_ref: return "above-ref";
    case Branch::reference: return "reference";
  }
  return "?";
}

// ---------------------------------------------------------------------- solve

struct SolveFlags {
  SystemFlags sys;
  NumericFlags num;
  int m = 1; // positive sentinel: not set
  bool auto_m = false;
  std::string profiles_path;
};

int run_solve(const SolveFlags& fl, bool m_given) {
  const SystemParams p = resolve_params(fl.sys);
  if (m_given == fl.auto_m) {
    std::cerr << "solve: exactly one of --m or --auto-m is required\n";
    return 2;
  }
  const double Omega = effective_frequency(p.omega0, p.omegac);
  const auto grid = make_radial_grid(fl.num.grid_n, default_r_max(Omega));
  const int m = fl.auto_m ? ground_state_m(p, {}, eig_options(fl.num)) : fl.m;
  const GroundState gs = solve_ground_state(p, m, grid, eig_options(fl.num));
  const InnerRule rule = default_inner_rule(grid->r_max, fl.num.inner_n, fl.num.angular_n);
  const ProfilePair prof = make_profiles(gs, grid, rule, fl.num.threads);
  const ConservationReport rep = check_conservation(gs, prof.density, prof.current);

  std::cout << "system:      " << kind_name(p.kind) << "\n";
  std::cout << "omega0:      " << format_sig12(p.omega0) << "\n";
  std::cout << "omegac:      " << format_sig12(p.omegac) << "\n";
  if (p.kind == SystemKind::isi) std::cout << "alpha:       " << format_sig12(p.alpha) << "\n";
  std::cout << "m:           " << gs.m << (fl.auto_m ? "  (ground-state scan)" : "") << "\n";
  std::cout << "Omega:       " << format_sig12(gs.Omega) << "\n";
  std::cout << "m_tilde:     " << format_sig12(gs.m_tilde) << "\n";
  std::cout << "energy:      " << format_sig12(gs.energy) << "\n";
  std::cout << "N integral:    " << format_sig12(rep.n_integral) << "  (target 2)\n";
  std::cout << "Lz integral:   " << format_sig12(rep.lz_integral) << "  (target " << gs.m << ")\n";
  std::cout << "|Lz| integral: " << format_sig12(rep.abs_lz_integral) << "  (target "
            << std::abs(gs.m) << ")\n";
  std::cout << "conservation:  " << (rep.pass ? "PASS" : "FAIL") << "\n";

  if (!fl.profiles_path.empty()) {
    std::ofstream out = open_output(fl.profiles_path);
    write_params_header(out, p, fl.num);
    out << "# omega0 = " << format_sig12(p.omega0) << ", m = " << gs.m << "\n";
    out << "r,rho,j_phi\n";
    for (std::size_t k = 0; k < grid->size(); ++k)
      out << format_sig12(grid->nodes[k]) << ',' << format_sig12(prof.density.rho[k]) << ','
          << format_sig12(prof.current.j_phi[k]) << "\n";
  }
  return rep.pass ? 0 : 1;
}

// ---------------------------------------------------------------------- phase

struct PhaseFlags {
  SystemFlags sys;
  NumericFlags num;
  double lo = kNaN, hi = kNaN, step = kNaN;
  int m_from = 1, m_to = 1; // positive sentinel: auto
  std::string out_path = "phase.csv";
  std::string crossings_path = "crossings.csv";
};

void resolve_range(SystemKind kind, double& lo, double& hi, double& step, bool bands = false) {
  if (std::isnan(lo)) lo = kind == SystemKind::isi ? 0.40 : 0.30;
  if (std::isnan(hi)) hi = kind == SystemKind::isi ? (bands ? 1.13 : 1.10) : 0.90;
  if (std::isnan(step)) step = 0.005;
}

int run_phase(const PhaseFlags& fl) {
  SystemParams base = resolve_params(fl.sys);
  double lo = fl.lo, hi = fl.hi, step = fl.step;
  resolve_range(base.kind, lo, hi, step);
  const auto opt = eig_options(fl.num);

  int m_from = fl.m_from, m_to = fl.m_to;
  if (m_from > 0 || m_to > 0) {
    // auto window: ground-state m at the range ends, padded by one shell
    SystemParams q = base;
    q.omega0 = lo;
    const int m_lo_end = ground_state_m(q, {}, opt);
    q.omega0 = hi;
    const int m_hi_end = ground_state_m(q, {}, opt);
    m_from = m_lo_end - 1;
    m_to = std::min(0, m_hi_end + 1);
  }

  const auto omega0s = make_omega0_range(lo, hi, step);
  std::vector<int> m_list;
  for (int m = m_from; m <= m_to; ++m) m_list.push_back(m);
  const auto rows = energy_landscape(base, omega0s, m_list, opt, fl.num.threads);

  std::ofstream out = open_output(fl.out_path);
  write_params_header(out, base, fl.num);
  out << "# omega0 range: [" << format_sig12(lo) << ", " << format_sig12(hi) << "] step "
      << format_sig12(step) << "\n";
  out << "omega0,m,energy\n";
  for (const EnergyPoint& r : rows)
    out << format_sig12(r.omega0) << ',' << r.m << ',' << format_sig12(r.energy) << "\n";

  const auto crossings = m_transition_points(base, lo, hi, m_from, m_to, opt);
  std::ofstream cout_ = open_output(fl.crossings_path);
  write_params_header(cout_, base, fl.num);
  cout_ << "# ground-state m changes at omega0_star: m_left below, m_right above\n";
  cout_ << "omega0_star,m_left,m_right\n";
  for (const MTransition& t : crossings)
    cout_ << format_sig12(t.omega0_star) << ',' << t.m_left << ',' << t.m_right << "\n";

  std::cout << "phase: " << rows.size() << " energy rows (m in [" << m_from << ", " << m_to
            << "]) -> " << fl.out_path << "\n";
  std::cout << "phase: " << crossings.size() << " crossings -> " << fl.crossings_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------- sweep

struct SweepFlags {
  SystemFlags sys;
  NumericFlags num;
  double lo = kNaN, hi = kNaN, step = kNaN;
  double reference = kNaN;
  int fixed_m = 1; // positive sentinel: auto
  std::string rescale = "pair-max";
  std::string out_path = "sweep.csv";
};

FamilySpec sweep_spec(const SweepFlags& fl) {
  SystemParams base = resolve_params(fl.sys);
  double lo = fl.lo, hi = fl.hi, step = fl.step;
  resolve_range(base.kind, lo, hi, step);
  FamilySpec spec;
  spec.base = base;
  spec.omega0_values = make_omega0_range(lo, hi, step);
  spec.reference_omega0 =
      std::isnan(fl.reference) ? (base.kind == SystemKind::isi ? 0.62 : 0.5) : fl.reference;
  spec.auto_m = fl.fixed_m > 0;
  if (!spec.auto_m) spec.fixed_m = fl.fixed_m;
  spec.rescale =
      fl.rescale == "family-max" ? RescaleConvention::family_max : RescaleConvention::pair_max;
  spec.grid_n = fl.num.grid_n;
  spec.inner_n = fl.num.inner_n;
  spec.angular_n = fl.num.angular_n;
  spec.eig = eig_options(fl.num);
  spec.threads = fl.num.threads;
  return spec;
}

void write_sweep_csv(std::ostream& out, const FamilySpec& spec, const NumericFlags& nf,
                     const FamilyRun& run) {
  write_params_header(out, spec.base, nf);
  out << "# omega0 range: [" << format_sig12(spec.omega0_values.front()) << ", "
      << format_sig12(spec.omega0_values.back()) << "] (" << run.records.size() << " points)\n";
  out << "# reference_omega0 = " << format_sig12(spec.reference_omega0)
      << ", reference_m = " << run.reference_m << "\n";
  out << "# m selection: " << (spec.auto_m ? "ground-state scan per point" : "fixed") << "\n";
  out << "# rescale convention: "
      << (spec.rescale == RescaleConvention::pair_max ? "pair-max (d_jp / (|m| + |m_ref|))"
                                                      : "family-max (d_jp / max over family)")
      << "\n";
  out << "# theta_rad: polar angle on the |m| shell from the law of cosines\n";
  out << "# branch: at the crossing omega0* the larger |m| is kept (low-omega0 side)\n";
  out << "omega0,m,energy,d_psi,d_rho,d_jp,d_jp_rescaled,theta_rad,branch,status\n";
  for (const DistanceRecord& r : run.records) {
    out << format_sig12(r.omega0) << ',' << r.m << ',' << format_sig12(r.energy) << ','
        << format_sig12(r.d_psi) << ',' << format_sig12(r.d_rho) << ',' << format_sig12(r.d_jp)
        << ',' << format_sig12(r.d_jp_rescaled) << ',' << format_sig12(r.theta) << ','
        << branch_name(r.branch) << ','
        << (r.status == RecordStatus::ok ? "ok" : ("failed:" + r.failure)) << "\n";
  }
}

int run_sweep(const SweepFlags& fl) {
  const FamilySpec spec = sweep_spec(fl);
  const FamilyRun run = run_family_detailed(spec);
  std::ofstream out = open_output(fl.out_path);
  write_sweep_csv(out, spec, fl.num, run);
  std::size_t failed = 0;
  for (const DistanceRecord& r : run.records)
    if (r.status != RecordStatus::ok) ++failed;
  std::cout << "sweep: " << run.records.size() << " records (" << failed << " failed) -> "
            << fl.out_path << "\n";
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------- bands

struct BandsFlags {
  SystemFlags sys;
  NumericFlags num;
  double lo = kNaN, hi = kNaN;
  double reference = kNaN;
  int shells = 4;
  int m_from = 1, m_to = 1; // positive sentinel: derive from --shells
  std::size_t theta_points = 33;
  double theta_tol = 1e-3;
  std::string out_path = "bands.csv";
  std::string plot_path;
};

int run_bands(const BandsFlags& fl) {
  SystemParams base = resolve_params(fl.sys);
  double lo = fl.lo, hi = fl.hi, step = 0.005;
  resolve_range(base.kind, lo, hi, step, /*bands=*/true);

  FamilySpec spec;
  spec.base = base;
  spec.omega0_values = {lo, hi};
  spec.reference_omega0 =
      std::isnan(fl.reference) ? (base.kind == SystemKind::isi ? 0.62 : 0.5) : fl.reference;
  spec.grid_n = fl.num.grid_n;
  spec.inner_n = fl.num.inner_n;
  spec.angular_n = fl.num.angular_n;
  spec.eig = eig_options(fl.num);
  spec.threads = fl.num.threads;

  int m_from = fl.m_from, m_to = fl.m_to;
  if (m_from > 0 || m_to > 0) {
    SystemParams q = base;
    q.omega0 = spec.reference_omega0;
    const int m_ref = ground_state_m(q, {}, spec.eig);
    m_from = m_ref - fl.shells;
    m_to = std::min(-1, m_ref + fl.shells);
  }

  const BandAnalysis analysis =
      band_analysis(spec, m_from, m_to, fl.theta_points, fl.theta_tol);

  std::ofstream out = open_output(fl.out_path);
  write_params_header(out, base, fl.num);
  out << "# reference_omega0 = " << format_sig12(spec.reference_omega0)
      << ", reference_m = " << analysis.reference_m << "\n";
  out << "# omega0 search range: [" << format_sig12(lo) << ", " << format_sig12(hi) << "]\n";
  out << "# theta from the law of cosines against the reference current\n";
  out << "m,omega0_lo,omega0_hi,theta_min,theta_max,delta_theta\n";
  for (const BandSummary& b : analysis.bands)
    out << b.m << ',' << format_sig12(b.omega0_lo) << ',' << format_sig12(b.omega0_hi) << ','
        << format_sig12(b.theta_min) << ',' << format_sig12(b.theta_max) << ','
        << format_sig12(b.delta_theta) << "\n";

  if (!fl.plot_path.empty()) {
    std::ofstream plot = open_output(fl.plot_path);
    plot << "# gnuplot commands for the band summary\n";
    plot << "set datafile separator ','\n";
    plot << "set xlabel '|m|'\n";
    plot << "set ylabel 'theta (rad)'\n";
    plot << "set key top left\n";
    plot << "plot '" << fl.out_path << "' using (abs($1)):4 with linespoints title 'theta_min', \\\n";
    plot << "     '" << fl.out_path << "' using (abs($1)):5 with linespoints title 'theta_max', \\\n";
    plot << "     '" << fl.out_path << "' using (abs($1)):6 with linespoints title 'delta_theta'\n";
  }

  std::cout << "bands: " << analysis.bands.size() << " shells (reference m = "
            << analysis.reference_m << ") -> " << fl.out_path << "\n";
  for (int m : analysis.skipped_shells)
    std::cout << "bands: shell m = " << m << " skipped (no validity interval in range)\n";
  return 0;
}

// ---------------------------------------------------------------------- check

struct CheckFlags {
  NumericFlags num;
  bool quick = false;
  bool inject_norm_error = false;
  std::uint64_t seed = 123456789u;
};

class CheckRunner {
public:
  void run(const std::string& name, const std::function<std::pair<bool, std::string>()>& suite) {
    bool ok = false;
    std::string detail;
    try {
      auto res = suite();
      ok = res.first;
      detail = res.second;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "ok   " : "FAIL ") << name << ": " << detail << "\n";
    ++total_;
    if (!ok) ++failed_;
  }

  int summary() const {
    std::cout << "summary: " << (total_ - failed_) << " passed, " << failed_ << " failed\n";
    return failed_ == 0 ? 0 : 1;
  }

private:
  int total_ = 0;
  int failed_ = 0;
};

int run_check(const CheckFlags& fl) {
  CheckRunner cr;
  const auto opt = eig_options(fl.num);

  cr.run("grid.gauss-moment", [&] {
    auto g = build_radial_grid(2000, 12.0, GridScheme::gauss_legendre_mapped);
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      v[k] = g.nodes[k] * std::exp(-0.5 * g.nodes[k] * g.nodes[k]);
    const double err = std::abs(integrate_radial(v, g) - 1.0);
    std::ostringstream os;
    os << "|int r exp(-r^2/2) dr - 1| = " << err;
    return std::make_pair(err < 1e-10, os.str());
  });

  cr.run("grid.trapezoid-constant", [&] {
    auto g = build_radial_grid(64, 30.0, GridScheme::uniform_trapezoid);
    std::vector<double> one(g.size(), 1.0);
    const double err = std::abs(integrate_radial(one, g) - 30.0);
    std::ostringstream os;
    os << "|int_0^30 1 dr - 30| = " << err;
    return std::make_pair(err < 1e-12, os.str());
  });

  cr.run("angular.cos2", [&] {
    auto rule = build_angular_rule(64);
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double c = std::cos(rule.nodes[j]);
      acc += rule.weights[j] * c * c;
    }
    const double err = std::abs(acc / std::numbers::pi - 1.0);
    std::ostringstream os;
    os << "relative error " << err;
    return std::make_pair(err < 1e-12, os.str());
  });

  cr.run("eigensolver.oscillator", [&] {
    // 2D oscillator: eps = Omega (2n + |m| + 1)
    const double eps = radial_ground_energy_on_mesh(
        [](double r) { return 0.5 * kRelativeMass * 4.0 * r * r; }, 0.0, kRelativeMass,
        default_r_max(2.0), 16000);
    const double err = std::abs(eps - 2.0);
    std::ostringstream os;
    os << "|eps - 2| = " << err << " (fixed 16000-point mesh)";
    return std::make_pair(err < 1e-6, os.str());
  });

  cr.run("eigensolver.polynomial-ansatz", [&] {
    // f = r^|m| (1 + r/(2|m|+1)) exp(-Omega r^2/4) solves the Coulomb relative
    // problem exactly at Omega = 1/(2|m|+1) with eps = Omega(|m|+2).
    double worst = 0.0;
    for (int mabs : {0, 1, 5}) {
      const double Om = 1.0 / (2.0 * mabs + 1.0);
      const double eps = hooke_relative_energy(Om, mabs, 1.0, default_r_max(Om), opt);
      worst = std::max(worst, std::abs(eps - Om * (mabs + 2.0)));
    }
    std::ostringstream os;
    os << "max |eps - closed form| = " << worst << " over |m| in {0,1,5}";
    return std::make_pair(worst < 1e-8, os.str());
  });

  cr.run("oracle.isi-lattice", [&] {
    // closed-form ISI energies vs the tridiagonal eigensolver, 27 points
    double worst = 0.0;
    for (int m : {0, -2, -7}) {
      for (double alpha : {1.0, 5.0, 9.0}) {
        for (double Om : {0.5, 1.0, 2.5}) {
          const double mt = std::sqrt(static_cast<double>(m) * m + alpha);
          const double closed = Om * (mt + 1.0);
          const double eps = solve_radial_ground(
                                 [Om, alpha](double r) {
                                   return 0.25 * Om * Om * r * r + alpha / (r * r);
                                 },
                                 std::abs(m), kRelativeMass,
                                 make_radial_grid(256, default_r_max(Om)), opt)
                                 .epsilon0;
          worst = std::max(worst, std::abs(eps - closed) / closed);
        }
      }
    }
    std::ostringstream os;
    os << "max relative deviation " << worst;
    return std::make_pair(worst < 1e-8, os.str());
  });

  cr.run("axioms.synthetic", [&] {
    // metric axioms for the generic p-norm machinery on random samples
    auto grid = make_radial_grid(128, 10.0);
    std::mt19937_64 rng(fl.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<MeasuredFunction<double>> fs;
    for (int i = 0; i < 24; ++i) {
      MeasuredFunction<double> f;
      f.grid = grid;
      f.measure.assign(grid->size(), 1.0);
      f.values.resize(grid->size());
      for (double& x : f.values) x = uni(rng);
      fs.push_back(std::move(f));
    }
    std::uniform_int_distribution<std::size_t> pick(0, fs.size() - 1);
    std::uniform_real_distribution<double> pdist(1.0, 3.0);
    int bad = 0;
    for (int t = 0; t < 500; ++t) {
      const auto& x = fs[pick(rng)];
      const auto& y = fs[pick(rng)];
      const auto& z = fs[pick(rng)];
      const double p = (t % 2 == 0) ? 1.0 : pdist(rng);
      const double dxy = lp_distance(x, y, p);
      const double dyx = lp_distance(y, x, p);
      const double dxz = lp_distance(x, z, p);
      const double dzy = lp_distance(z, y, p);
      if (!(dxy >= 0.0) || dxy != dyx || dxy > dxz + dzy + 1e-12) ++bad;
    }
    std::ostringstream os;
    os << bad << " violations in 500 triples";
    return std::make_pair(bad == 0, os.str());
  });

  // Reduced ISI family shared by the physical suites below.
  FamilySpec mini;
  mini.base = SystemParams{SystemKind::isi, 0.62, 5.5, 5.0};
  mini.omega0_values = make_omega0_range(0.56, 0.72, 0.02);
  mini.reference_omega0 = 0.62;
  mini.grid_n = fl.num.grid_n;
  mini.inner_n = fl.num.inner_n;
  mini.angular_n = fl.num.angular_n;
  mini.eig = opt;
  mini.threads = fl.num.threads;
  FamilyRun family = run_family_detailed(mini);

  if (fl.inject_norm_error) {
    // testing hook: corrupt the reference profile normalization by 1%
    GroundState& ref = family.states[family.reference_index];
    for (double& v : ref.f.values) v *= 1.005;
    auto eval = ref.f_eval;
    ref.f_eval = [eval](double r) { return 1.005 * eval(r); };
    const ProfilePair prof = make_profiles(ref, family.grid, family.inner, fl.num.threads);
    family.densities[family.reference_index] = prof.density;
    family.currents[family.reference_index] = prof.current;
  }

  cr.run("conservation.family", [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < family.states.size(); ++i) {
      if (family.records[i].status != RecordStatus::ok) return std::make_pair(
          false, "point omega0 = " + format_sig12(family.records[i].omega0) + " failed: " +
                     family.records[i].failure);
      const auto rep =
          check_conservation(family.states[i], family.densities[i], family.currents[i]);
      worst = std::max({worst, std::abs(rep.n_integral - 2.0),
                        std::abs(rep.lz_integral - family.states[i].m),
                        std::abs(rep.abs_lz_integral - std::abs(family.states[i].m))});
      if (!rep.pass) {
        std::ostringstream os;
        os << "conservation failed at omega0 = " << format_sig12(family.records[i].omega0)
           << " (N = " << rep.n_integral << ", Lz = " << rep.lz_integral << ")";
        return std::make_pair(false, os.str());
      }
    }
    std::ostringstream os;
    os << family.states.size() << " states, max deviation " << worst;
    return std::make_pair(true, os.str());
  });

  cr.run("shells.radii", [&] {
    double worst_psi = 0.0;
    double worst_rho = 0.0;
    double worst_jp = 0.0;
    for (std::size_t i = 0; i < family.states.size(); ++i) {
      if (family.records[i].status != RecordStatus::ok) continue;
      worst_psi = std::max(worst_psi,
                           std::abs(d_psi_to_zero(family.states[i]) - std::numbers::sqrt2));
      worst_rho = std::max(worst_rho, std::abs(d_rho_to_zero(family.densities[i]) - 2.0));
      worst_jp = std::max(worst_jp, std::abs(d_jp_to_zero(family.currents[i]) -
                                             std::abs(family.states[i].m)));
    }
    std::ostringstream os;
    os << "deviations: psi " << worst_psi << ", rho " << worst_rho << ", jp " << worst_jp;
    return std::make_pair(worst_psi < 1e-8 && worst_rho < 1e-6 && worst_jp < 1e-6, os.str());
  });

  cr.run("axioms.physical", [&] {
    std::mt19937_64 rng(fl.seed + 1);
    std::uniform_int_distribution<std::size_t> pick(0, family.states.size() - 1);
    int bad = 0;
    for (int t = 0; t < 200; ++t) {
      const std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
      const double slack = 1e-9 + 1e-6;
      const double pxy = d_psi(family.states[i], family.states[j]);
      if (pxy != d_psi(family.states[j], family.states[i]) ||
          pxy > d_psi(family.states[i], family.states[k]) +
                    d_psi(family.states[k], family.states[j]) + slack)
        ++bad;
      const double rxy = d_rho(family.densities[i], family.densities[j]);
      if (rxy != d_rho(family.densities[j], family.densities[i]) ||
          rxy > d_rho(family.densities[i], family.densities[k]) +
                    d_rho(family.densities[k], family.densities[j]) + slack)
        ++bad;
      const double jxy = d_jp(family.currents[i], family.currents[j]);
      if (jxy != d_jp(family.currents[j], family.currents[i]) ||
          jxy > d_jp(family.currents[i], family.currents[k]) +
                    d_jp(family.currents[k], family.currents[j]) + slack)
        ++bad;
    }
    std::ostringstream os;
    os << bad << " violations in 200 triples x 3 metrics";
    return std::make_pair(bad == 0, os.str());
  });

  cr.run("psi-gap.law", [&] {
    const GroundState& ref = family.states[family.reference_index];
    for (std::size_t i = 0; i < family.states.size(); ++i) {
      if (family.records[i].status != RecordStatus::ok) continue;
      const double d = d_psi(ref, family.states[i]);
      if (family.states[i].m != ref.m && std::abs(d - 2.0) > 1e-12)
        return std::make_pair(false, "cross-shell d_psi != 2 at omega0 = " +
                                         format_sig12(family.records[i].omega0));
      if (family.states[i].m == ref.m && !(d < 2.0))
        return std::make_pair(false, std::string("within-shell d_psi not < 2"));
    }
    return std::make_pair(true, std::string("cross-shell d_psi = 2 to 1e-12; within-shell < 2"));
  });

  cr.run("bound.triangle", [&] {
    double worst = -1.0;
    for (std::size_t i = 0; i < family.currents.size(); ++i)
      for (std::size_t j = 0; j < family.currents.size(); ++j) {
        if (family.records[i].status != RecordStatus::ok ||
            family.records[j].status != RecordStatus::ok)
          continue;
        const double d = d_jp(family.currents[i], family.currents[j]);
        const double bound = triangle_bound(family.states[i].m, family.states[j].m);
        worst = std::max(worst, d - bound);
      }
    std::ostringstream os;
    os << "max (d_jp - bound) = " << worst;
    return std::make_pair(worst <= 1e-9, os.str());
  });

  cr.run("reference.hooke", [&] {
    const int m = ground_state_m(SystemParams{SystemKind::hooke, 0.5, 5.0, 0.0}, {}, opt);
    std::ostringstream os;
    os << "auto m = " << m;
    return std::make_pair(m == -5, os.str());
  });

  if (!fl.quick) {
    cr.run("oracle.monte-carlo", [&] {
      const GroundState& ref = family.states[family.reference_index];
      const DensityProfile& rho = family.densities[family.reference_index];
      const CurrentProfile& cur = family.currents[family.reference_index];
      const RadialGrid& g = *family.grid;
      int bad = 0;
      std::ostringstream os;
      for (double target : {0.8, 1.4, 2.2}) {
        // nearest grid node to the probe radius
        std::size_t kbest = 0;
        for (std::size_t k = 0; k < g.size(); ++k)
          if (std::abs(g.nodes[k] - target) < std::abs(g.nodes[kbest] - target)) kbest = k;
        const auto mc = mc_profile_at(ref.f_eval, ref.m, ref.cm_exponent, g.nodes[kbest],
                                      g.r_max, 10'000'000, fl.seed + kbest);
        if (std::abs(mc.rho - rho.rho[kbest]) > 3.0 * mc.rho_stderr) ++bad;
        if (std::abs(mc.j_phi - cur.j_phi[kbest]) > 3.0 * mc.j_phi_stderr) ++bad;
      }
      os << bad << " of 6 comparisons outside 3 standard errors";
      return std::make_pair(bad == 0, os.str());
    });
  }

  return cr.summary();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmetric: metric-space analysis of two-electron quantum dot ground states"};
  app.require_subcommand(1);
  app.set_config("--config", "", "line-oriented `key = value` configuration file");
  app.get_config_formatter_base()->comment('#');

  SolveFlags solve_fl;
  auto* solve_cmd = app.add_subcommand("solve", "solve one ground state and check conservation");
  add_system_flags(solve_cmd, solve_fl.sys, true);
  solve_cmd->get_option("--omega0")->required();
  auto* m_opt = solve_cmd->add_option("--m", solve_fl.m, "angular momentum quantum number");
  solve_cmd->add_flag("--auto-m", solve_fl.auto_m, "select the ground-state m automatically");
  solve_cmd->add_option("--profiles", solve_fl.profiles_path, "write rho/j_phi profiles to CSV");
  add_numeric_flags(solve_cmd, solve_fl.num);

  PhaseFlags phase_fl;
  auto* phase_cmd = app.add_subcommand("phase", "E(m; omega0) table and m-transition points");
  add_system_flags(phase_cmd, phase_fl.sys, false);
  phase_cmd->add_option("--omega0-min", phase_fl.lo, "sweep start");
  phase_cmd->add_option("--omega0-max", phase_fl.hi, "sweep end");
  phase_cmd->add_option("--omega0-step", phase_fl.step, "sweep step");
  phase_cmd->add_option("--m-from", phase_fl.m_from, "lowest m (default: auto)");
  phase_cmd->add_option("--m-to", phase_fl.m_to, "highest m (default: auto)");
  phase_cmd->add_option("--out", phase_fl.out_path, "energy table CSV")->capture_default_str();
  phase_cmd->add_option("--crossings-out", phase_fl.crossings_path, "crossing list CSV")
      ->capture_default_str();
  add_numeric_flags(phase_cmd, phase_fl.num);

  SweepFlags sweep_fl;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "distance sweep of a ground-state family vs a reference");
  add_system_flags(sweep_cmd, sweep_fl.sys, false);
  sweep_cmd->add_option("--omega0-min", sweep_fl.lo, "sweep start");
  sweep_cmd->add_option("--omega0-max", sweep_fl.hi, "sweep end");
  sweep_cmd->add_option("--omega0-step", sweep_fl.step, "sweep step");
  sweep_cmd->add_option("--reference", sweep_fl.reference, "reference omega0");
  sweep_cmd->add_option("--m", sweep_fl.fixed_m, "fixed m for every point (default: auto scan)");
  sweep_cmd->add_option("--rescale", sweep_fl.rescale, "d_jp rescaling convention")
      ->check(CLI::IsMember({"pair-max", "family-max"}))
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_fl.out_path, "output CSV")->capture_default_str();
  add_numeric_flags(sweep_cmd, sweep_fl.num);

  BandsFlags bands_fl;
  auto* bands_cmd =
      app.add_subcommand("bands", "theta_min/theta_max/delta_theta per |m| shell");
  add_system_flags(bands_cmd, bands_fl.sys, false);
  bands_cmd->add_option("--omega0-min", bands_fl.lo, "shell search start");
  bands_cmd->add_option("--omega0-max", bands_fl.hi,
                        "shell search end (default extends past the sweep default so the "
                        "outermost shell is complete)");
  bands_cmd->add_option("--reference", bands_fl.reference, "reference omega0");
  bands_cmd->add_option("--shells", bands_fl.shells, "shells on each side of the reference")
      ->capture_default_str();
  bands_cmd->add_option("--m-from", bands_fl.m_from, "lowest shell m (overrides --shells)");
  bands_cmd->add_option("--m-to", bands_fl.m_to, "highest shell m (overrides --shells)");
  bands_cmd->add_option("--theta-points", bands_fl.theta_points, "initial scan points per shell")
      ->capture_default_str();
  bands_cmd->add_option("--theta-tol", bands_fl.theta_tol, "refinement stop (radians)")
      ->capture_default_str();
  bands_cmd->add_option("--out", bands_fl.out_path, "band summary CSV")->capture_default_str();
  bands_cmd->add_option("--plot-script", bands_fl.plot_path, "write gnuplot commands here");
  add_numeric_flags(bands_cmd, bands_fl.num);

  CheckFlags check_fl;
  auto* check_cmd = app.add_subcommand("check", "run the invariant suite");
  check_cmd->add_flag("--quick", check_fl.quick, "skip the Monte-Carlo oracles");
  check_cmd->add_flag("--inject-norm-error", check_fl.inject_norm_error,
                      "testing hook: corrupt a profile normalization by 1%");
  check_cmd->add_option("--seed", check_fl.seed, "seed for randomized suites")
      ->capture_default_str();
  add_numeric_flags(check_cmd, check_fl.num);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e); // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_fl, m_opt->count() > 0);
    if (phase_cmd->parsed()) return run_phase(phase_fl);
    if (sweep_cmd->parsed()) return run_sweep(sweep_fl);
    if (bands_cmd->parsed()) return run_bands(bands_fl);
    if (check_cmd->parsed()) return run_check(check_fl);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
