#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "qmetric/observables.hpp"
#include "qmetric/qm_metric.hpp"
#include "qmetric/systems.hpp"

using namespace qmetric;

namespace {

struct TwoStates {
  RadialGridPtr grid;
  InnerRule rule;
  GroundState a;     // reference shell, m = -10, omega0 = 0.62
  GroundState b;     // same shell, omega0 = 0.60
  GroundState c;     // next shell, m = -9, omega0 = 0.66
  ProfilePair pa, pb, pc;
};

TwoStates make_states() {
  TwoStates s;
  const double om_min = effective_frequency(0.60, 5.5);
  s.grid = make_radial_grid(1200, default_r_max(om_min));
  s.rule = default_inner_rule(s.grid->r_max, 300, 64);
  s.a = solve_isi(SystemParams{SystemKind::isi, 0.62, 5.5, 5.0}, -10, s.grid);
  s.b = solve_isi(SystemParams{SystemKind::isi, 0.60, 5.5, 5.0}, -10, s.grid);
  s.c = solve_isi(SystemParams{SystemKind::isi, 0.66, 5.5, 5.0}, -9, s.grid);
  s.pa = make_profiles(s.a, s.grid, s.rule, 2);
  s.pb = make_profiles(s.b, s.grid, s.rule, 2);
  s.pc = make_profiles(s.c, s.grid, s.rule, 2);
  return s;
}

} // namespace

TEST_CASE("d_psi: identity, gap law, and shell radius", "[qm]") {
  auto s = make_states();

  REQUIRE(d_psi(s.a, s.a) == 0.0);
  const double dab = d_psi(s.a, s.b);
  REQUIRE(dab > 0.0);
  REQUIRE(dab < 2.0);
  REQUIRE(dab == d_psi(s.b, s.a));

  // different m: angular orthogonality forces zero overlap, hence exactly 2
  REQUIRE(d_psi(s.a, s.c) == 2.0);

  REQUIRE(std::abs(d_psi_to_zero(s.a) - std::numbers::sqrt2) < 1e-8);
  REQUIRE(std::abs(d_psi_to_zero(s.c) - std::numbers::sqrt2) < 1e-8);
}

TEST_CASE("d_rho: identity, shell radius, disjoint saturation", "[qm]") {
  auto s = make_states();
  REQUIRE(d_rho(s.pa.density, s.pa.density) == 0.0);
  REQUIRE(std::abs(d_rho_to_zero(s.pa.density) - 2.0) < 1e-6);
  const double d = d_rho(s.pa.density, s.pb.density);
  REQUIRE(d > 0.0);
  REQUIRE(d == d_rho(s.pb.density, s.pa.density));

  // synthetic disjoint densities, each integrating to N = 2, are 4 apart
  DensityProfile u, v;
  u.grid = v.grid = s.grid;
  u.rho.assign(s.grid->size(), 0.0);
  v.rho.assign(s.grid->size(), 0.0);
  for (std::size_t k = 0; k < s.grid->size(); ++k) {
    if (s.grid->nodes[k] < 2.0) u.rho[k] = 1.0;
    if (s.grid->nodes[k] > 4.0 && s.grid->nodes[k] < 6.0) v.rho[k] = 1.0;
  }
  auto normalize = [&](DensityProfile& p) {
    const double n = d_rho_to_zero(p);
    for (double& x : p.rho) x *= 2.0 / n;
  };
  normalize(u);
  normalize(v);
  REQUIRE(std::abs(d_rho(u, v) - 4.0) < 1e-12);
}

TEST_CASE("d_jp: identity, shell radius, opposite-circulation saturation", "[qm]") {
  auto s = make_states();
  REQUIRE(d_jp(s.pa.current, s.pa.current) == 0.0);
  REQUIRE(std::abs(d_jp_to_zero(s.pa.current) - 10.0) < 1e-5);
  REQUIRE(std::abs(d_jp_to_zero(s.pc.current) - 9.0) < 1e-5);

  // mirror state: same omega0, opposite m; currents oppose everywhere, so the
  // distance saturates the |m1| + |m2| chain
  const GroundState mirror = solve_isi(SystemParams{SystemKind::isi, 0.62, 5.5, 5.0}, 10, s.grid);
  const ProfilePair pm = make_profiles(mirror, s.grid, s.rule, 2);
  const double d = d_jp(s.pa.current, pm.current);
  REQUIRE(std::abs(d - 20.0) < 1e-4);
  REQUIRE(d <= triangle_bound(-10, 10) + 1e-9);

  // same-shell distances never exceed the shell diameter 2|m|
  REQUIRE(d_jp(s.pa.current, s.pb.current) <= 2.0 * 10.0 + 1e-5);
}

TEST_CASE("triangle bound values", "[qm]") {
  REQUIRE(triangle_bound(-10, -9) == 19.0);
  REQUIRE(triangle_bound(0, 0) == 0.0);
  REQUIRE(triangle_bound(7, -3) == 10.0);
}

TEST_CASE("sphere angle: poles, right angle, clamping, errors", "[qm]") {
  REQUIRE(sphere_angle(-10, -10, 0.0) == 0.0);
  REQUIRE(std::abs(sphere_angle(-10, -10, 20.0) - std::numbers::pi) < 1e-15);
  // m_ref^2 + m^2 = D^2: right angle
  REQUIRE(std::abs(sphere_angle(-10, -9, std::sqrt(181.0)) - 0.5 * std::numbers::pi) < 1e-12);

  // tiny overshoot from quadrature noise is clamped...
  const double d_over = 20.0 * std::sqrt(1.0 + 1e-12);
  REQUIRE(std::abs(sphere_angle(-10, -10, d_over) - std::numbers::pi) < 1e-5);
  // ...but a genuine inconsistency is not
  REQUIRE_THROWS_AS(sphere_angle(-1, -1, 3.0), inconsistent_distance);
  REQUIRE_THROWS_AS(sphere_angle(0, -5, 1.0), undefined_angle);
  REQUIRE_THROWS_AS(sphere_angle(-5, 0, 1.0), undefined_angle);
}

TEST_CASE("lp views of physical objects land on their shells", "[qm]") {
  auto s = make_states();

  // particle number as the L1 norm of the density
  REQUIRE(std::abs(p_norm(density_as_measured(s.pa.density), 1.0) - 2.0) < 1e-6);

  // the N-normalized wavefunction factor sqrt(2) f as an L2 object: radius sqrt(2)
  MeasuredFunction<std::complex<double>> psi_factor;
  psi_factor.grid = s.grid;
  psi_factor.measure.resize(s.grid->size());
  psi_factor.values.resize(s.grid->size());
  for (std::size_t k = 0; k < s.grid->size(); ++k) {
    psi_factor.measure[k] = 2.0 * std::numbers::pi * s.grid->nodes[k];
    psi_factor.values[k] =
        std::numbers::sqrt2 * s.a.f.values[k] * std::exp(std::complex<double>(0.0, -10.0 * 0.3));
  }
  REQUIRE(std::abs(p_norm(psi_factor, 2.0) - std::numbers::sqrt2) < 1e-8);

  // angular-momentum density of the m = -10 state on the |m| = 10 shell
  REQUIRE(std::abs(p_norm(angular_momentum_density(s.pa.current), 1.0) - 10.0) < 1e-5);
}
