#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "qmetric/eigensolver.hpp"
#include "qmetric/systems.hpp"

using namespace qmetric;

namespace {

// Coulomb relative problem V = Omega^2 r^2/4 + 1/r (mu = 1/2). Substituting
// f = r^|m| (1 + a r) exp(-Omega r^2/4) into the radial equation forces
// a = 1/(2|m|+1), is exact when Omega = 1/(2|m|+1), and gives
// eps0 = Omega (|m| + 2). Re-derived by matching powers of r; the r^{L-1}
// balance fixes a, the r^{L}/r^{L+1} balance fixes Omega and eps.
double ansatz_omega(int m_abs) { return 1.0 / (2.0 * m_abs + 1.0); }
double ansatz_energy(int m_abs) { return ansatz_omega(m_abs) * (m_abs + 2.0); }

} // namespace

TEST_CASE("2D oscillator ground state", "[eigensolver]") {
  // V = (1/2) mu Omega^2 r^2 with Omega = 2: eps = Omega (2n + |m| + 1) = 2
  const double Om = 2.0;
  auto grid = make_radial_grid(256, default_r_max(Om));
  auto res = solve_radial_ground(
      [Om](double r) { return 0.5 * kRelativeMass * Om * Om * r * r; }, 0.0, kRelativeMass, grid);
  REQUIRE(std::abs(res.epsilon0 - 2.0) < 1e-8);
}

TEST_CASE("polynomial-ansatz Coulomb points", "[eigensolver]") {
  for (int m_abs : {0, 1, 5}) {
    const double Om = ansatz_omega(m_abs);
    auto grid = make_radial_grid(256, default_r_max(Om));
    auto res = hooke_relative_ground(Om, m_abs, 1.0, grid);
    INFO("m_abs = " << m_abs);
    REQUIRE(std::abs(res.epsilon0 - ansatz_energy(m_abs)) < 1e-8);
  }
}

TEST_CASE("inverse-square term shifts the centrifugal index", "[eigensolver]") {
  // V = Omega^2 r^2/4 + alpha/r^2 with m = 0: eps = Omega (sqrt(2 mu alpha) + 1)
  const double alpha = 5.0;
  auto grid = make_radial_grid(256, default_r_max(1.0));
  auto res = solve_radial_ground([alpha](double r) { return 0.25 * r * r + alpha / (r * r); },
                                 0.0, kRelativeMass, grid);
  REQUIRE(std::abs(res.epsilon0 - (std::sqrt(5.0) + 1.0)) < 1e-8);
}

TEST_CASE("fixed-mesh energies converge at second order", "[eigensolver]") {
  // error ratios against the ansatz oracle when halving the spacing
  const int m_abs = 5;
  const double Om = ansatz_omega(m_abs);
  const double exact = ansatz_energy(m_abs);
  const double r_max = default_r_max(Om);
  auto pot = [Om](double r) { return 0.25 * Om * Om * r * r + 1.0 / r; };
  std::vector<double> errs;
  for (std::size_t n : {500, 1000, 2000, 4000})
    errs.push_back(radial_ground_energy_on_mesh(pot, m_abs, kRelativeMass, r_max, n) - exact);
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double ratio = errs[i] / errs[i + 1];
    INFO("level " << i << ": ratio " << ratio);
    REQUIRE(ratio > 3.5);
    REQUIRE(ratio < 4.5);
  }
}

TEST_CASE("profiles are nodeless, normalized, and r^{|m|}-like at the origin", "[eigensolver]") {
  const double Om = ansatz_omega(5);
  auto grid = make_radial_grid(1000, default_r_max(Om));
  auto res = hooke_relative_ground(Om, 5, 1.0, grid);

  REQUIRE(std::abs(radial_norm_squared(res.f) - 1.0) < 1e-10);

  double fmax = 0.0;
  for (double v : res.f.values) fmax = std::max(fmax, std::abs(v));
  for (double v : res.f.values) REQUIRE(v > -1e-12 * fmax);

  // shape against the normalized ansatz r^5 (1 + r/11) e^{-Om r^2/4}
  std::vector<double> exact(grid->size());
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double r = grid->nodes[k];
    exact[k] = std::pow(r, 5) * (1.0 + r / 11.0) * std::exp(-0.25 * Om * r * r);
  }
  SampledRadialFunction ansatz{grid, exact};
  const double scale = 1.0 / std::sqrt(radial_norm_squared(ansatz));
  double fpeak = 0.0;
  for (double v : res.f.values) fpeak = std::max(fpeak, v);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid->size(); ++k)
    worst = std::max(worst, std::abs(res.f.values[k] - scale * exact[k]));
  REQUIRE(worst < 1e-6 * fpeak);

  // r^{|m|} power law at the origin: the discrete tail carries O((h/r)^2)
  // relative error, so compare the f(2r)/f(r) ratio only to percent level
  const double got_ratio = res.f_eval(0.1) / res.f_eval(0.05);
  const double exact_ratio =
      (std::pow(0.1, 5) * (1 + 0.1 / 11.0) * std::exp(-0.25 * Om * 0.01)) /
      (std::pow(0.05, 5) * (1 + 0.05 / 11.0) * std::exp(-0.25 * Om * 0.0025));
  REQUIRE(std::abs(got_ratio / exact_ratio - 1.0) < 0.02);
}

TEST_CASE("eigensolver profile matches the closed-form ISI shape", "[eigensolver]") {
  const double Om = 2.0;
  const double alpha = 5.0;
  const double mt = std::sqrt(alpha); // m = 0
  auto grid = make_radial_grid(2000, default_r_max(Om));
  auto res = solve_radial_ground(
      [Om, alpha](double r) { return 0.25 * Om * Om * r * r + alpha / (r * r); }, 0.0,
      kRelativeMass, grid);

  const double C = isi_profile_constant(mt, Om);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double r = grid->nodes[k];
    const double exact = C * std::pow(r, mt) * std::exp(-0.25 * Om * r * r);
    worst = std::max(worst, std::abs(res.f.values[k] - exact));
  }
  REQUIRE(worst < 1e-6);
}

TEST_CASE("eigensolver rejects bad input and reports non-convergence", "[eigensolver]") {
  auto grid = make_radial_grid(64, 10.0);
  REQUIRE_THROWS_AS(solve_radial_ground([](double) { return std::nan(""); }, 0.0, kRelativeMass,
                                        grid),
                    invalid_value);
  REQUIRE_THROWS_AS(
      solve_radial_ground([](double r) { return r * r; }, 0.0, -1.0, grid),
      std::invalid_argument);

  RadialEigenOptions strict;
  strict.mesh_n = 128;
  strict.max_refinements = 0;
  strict.rel_tol = 1e-16;
  try {
    solve_radial_ground([](double r) { return 0.25 * r * r + 1.0 / r; }, 0.0, kRelativeMass,
                        grid, strict);
    FAIL("expected convergence_failure");
  } catch (const convergence_failure& e) {
    REQUIRE(std::string(e.what()).find("not converged") != std::string::npos);
  }
}
