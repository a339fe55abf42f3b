#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qmetric/roots.hpp"
#include "qmetric/systems.hpp"

using namespace qmetric;

TEST_CASE("bisection on a line", "[roots]") {
  const double x = bisect_root([](double t) { return t - 1.0; }, 0.0, 2.0, 1e-12);
  REQUIRE(std::abs(x - 1.0) < 1e-12);
}

TEST_CASE("bisection finds sqrt(2)", "[roots]") {
  const double x = bisect_root([](double t) { return t * t - 2.0; }, 1.0, 2.0, 1e-11);
  REQUIRE(std::abs(x - std::numbers::sqrt2) < 1e-10);
}

TEST_CASE("missing sign change raises bracket_error", "[roots]") {
  REQUIRE_THROWS_AS(bisect_root([](double t) { return t * t + 1.0; }, 0.0, 1.0, 1e-10),
                    bracket_error);
}

TEST_CASE("exact zero at a probe point is returned as-is", "[roots]") {
  // midpoint of [0, 2] hits the root of t - 1 exactly on the first probe
  const double x = bisect_root([](double t) { return t - 1.0; }, 0.0, 2.0, 1e-3);
  REQUIRE(x == 1.0);
}

TEST_CASE("ISI level-crossing frequency from closed-form energies", "[roots]") {
  // E(-10; w0) = E(-9; w0) at Omega* = (omegac/2)/(sqrt(105) - sqrt(86));
  // the bisection root of the energy difference must match the algebra.
  SystemParams p{SystemKind::isi, 0.62, 5.5, 5.0};
  auto g = [&](double w0) {
    SystemParams q = p;
    q.omega0 = w0;
    return isi_energy(q, -10) - isi_energy(q, -9);
  };
  const double w0s = bisect_root(g, 0.6, 0.7, 1e-12);

  const double omega_star = (5.5 / 2.0) / (std::sqrt(105.0) - std::sqrt(86.0));
  const double expected = std::sqrt(omega_star * omega_star - 5.5 * 5.5 / 4.0);
  REQUIRE(std::abs(w0s - expected) < 1e-8);
  REQUIRE(std::abs(w0s - 0.6482) < 1e-3);
}
