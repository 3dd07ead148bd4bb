#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ising/onsager.hpp"
#include "ising/quadrature.hpp"
#include "support/oracles.hpp"

using namespace ising;

namespace {
constexpr double kPi = 3.14159265358979323846;
AnisotropicCouplings iso(double kl) { return {kl, kl}; }
}  // namespace

TEST_CASE("elliptic_k: pinned values and quadrature oracle") {
  CHECK(elliptic_k(0.0) == doctest::Approx(kPi / 2).epsilon(1e-13));
  // frozen from a 40-digit evaluation of the defining integral
  CHECK(elliptic_k(0.5) == doctest::Approx(1.685750354812596).epsilon(1e-12));
  CHECK(elliptic_k(0.999) ==
        doctest::Approx(oracle::elliptic_k_quadrature(0.999)).epsilon(1e-9));
}

TEST_CASE("elliptic_k agrees with direct quadrature across the modulus range") {
  for (double k : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99})
    CHECK(elliptic_k(k) ==
          doctest::Approx(oracle::elliptic_k_quadrature(k)).epsilon(1e-10));
}

TEST_CASE("elliptic_k: domain errors at and beyond the divergence") {
  CHECK_THROWS_AS(elliptic_k(1.0), std::domain_error);
  CHECK_THROWS_AS(elliptic_k(1.5), std::domain_error);
  CHECK_THROWS_AS(elliptic_k(-0.1), std::domain_error);
}

TEST_CASE("internal energy: ground-state, high-temperature, and critical limits") {
  CHECK(internal_energy_exact(10.0) == doctest::Approx(-2.0).epsilon(1e-6));
  // small-beta series u ~ -2 beta
  CHECK(std::abs(internal_energy_exact(0.05) - (-0.1)) < 5e-3);
  const double u_c = internal_energy_exact(critical_beta());
  CHECK(std::abs(u_c - (-std::sqrt(2.0))) < 1e-4);
}

TEST_CASE("internal energy: monotone non-increasing in beta") {
  double prev = internal_energy_exact(0.05);
  for (int i = 1; i < 200; ++i) {
    const double beta = 0.05 + (1.0 - 0.05) * i / 199.0;
    const double u = internal_energy_exact(beta);
    CHECK(u <= prev + 1e-12);
    prev = u;
  }
}

TEST_CASE("internal energy: coupling scale and domain errors") {
  // u_J(beta) = J * u_1(beta J)
  CHECK(internal_energy_exact(0.15, 2.0) ==
        doctest::Approx(2.0 * internal_energy_exact(0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(internal_energy_exact(0.0), std::domain_error);
  CHECK_THROWS_AS(internal_energy_exact(-1.0), std::domain_error);
  CHECK_THROWS_AS(internal_energy_exact(0.3, 0.0), std::domain_error);
}

TEST_CASE("critical beta: value, scaling, and defining relation") {
  CHECK(1.0 / critical_beta() == doctest::Approx(2.269).epsilon(1e-3 / 2.269));
  CHECK(critical_beta(2.0) == doctest::Approx(critical_beta() / 2.0).epsilon(1e-14));
  const double s = std::sinh(2.0 * critical_beta());
  CHECK(std::abs(s * s - 1.0) < 1e-12);
  CHECK_THROWS_AS(critical_beta(0.0), std::domain_error);
}

TEST_CASE("free energy integral: strong-coupling limit approaches -2J") {
  // At K = L = 3 the integrand is ln(2 cosh(2K+2L)) to high accuracy,
  // so f -> -2 K T = -2 J.
  CHECK(free_energy_integral(iso(3.0), 1.0 / 3.0) == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("free energy: finite product converges to the integral") {
  const double t = 1.0 / 0.3;
  const double fi = free_energy_integral(iso(0.3), t);
  const double ff = free_energy_finite(iso(0.3), t, 256);
  CHECK(std::abs(ff - fi) / std::abs(fi) < 1e-4);
}

TEST_CASE("free energy finite: p=1 equals the hand-expanded two-term form") {
  // theta = pi/4 and 3pi/4 share cos(2 theta) = 0, so both terms coincide
  const double kl = 0.37, t = 2.1;
  const double k = ising_modulus(iso(kl));
  const double a = std::cosh(2 * kl) * std::cosh(2 * kl);
  const double c = (1.0 / k) * std::sqrt(1.0 + k * k);
  const double expected = -(t / 4.0) * (2.0 * std::log(2.0 * (a + c)));
  CHECK(free_energy_finite(iso(kl), t, 1) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("free energy finite: convergence order at least two while above noise") {
  for (double kl : {0.2, 0.3, 0.6}) {
    const double t = 1.0 / kl;
    const double fi = free_energy_integral(iso(kl), t);
    const double floor = 1e-12 * std::abs(fi);
    double prev_err = std::abs(free_energy_finite(iso(kl), t, 1) - fi);
    bool measured_any = false;
    for (int p = 2; p <= 256; p *= 2) {
      const double err = std::abs(free_energy_finite(iso(kl), t, p) - fi);
      if (prev_err > floor) {
        // halves-or-better per doubling; in fact the drop is much faster
        CHECK(err <= prev_err / 4.0 + floor);
        measured_any = true;
      }
      prev_err = err;
    }
    CHECK(measured_any);
  }
}

TEST_CASE("free energy: symmetric under K <-> L") {
  const AnisotropicCouplings a{0.25, 0.55};
  const AnisotropicCouplings b{0.55, 0.25};
  CHECK(free_energy_integral(a, 1.7) ==
        doctest::Approx(free_energy_integral(b, 1.7)).epsilon(1e-10));
}

TEST_CASE("modulus: sinh(2K) sinh(2L) = 1 on the critical manifold") {
  const double bc = critical_beta();
  CHECK(std::abs(std::sinh(2 * bc) * std::sinh(2 * bc) - 1.0) < 1e-12);
  CHECK(ising_modulus(iso(bc)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singular free energy: zero at k = 1 and frozen reference value") {
  const double bc = critical_beta();
  CHECK(std::abs(singular_free_energy(iso(bc), 1.0 / bc)) < 1e-13);

  // K = L chosen so sinh^2(2K) = 2, i.e. k = 0.5; value frozen from a
  // 40-digit re-evaluation of the closed form
  const double kl = 0.5 * std::asinh(std::sqrt(2.0));
  CHECK(ising_modulus(iso(kl)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(singular_free_energy(iso(kl), 1.0 / kl) ==
        doctest::Approx(-0.07627253566798786).epsilon(1e-12));
}

TEST_CASE("singular free energy: slope diverges logarithmically toward k = 1") {
  // evaluate at isotropic couplings giving k = 0.9, 0.99, 0.999
  auto coupling_for_modulus = [](double k) {
    return 0.5 * std::asinh(1.0 / std::sqrt(k));
  };
  const double h = 1e-6;
  double prev_slope = 0.0;
  for (double k : {0.9, 0.99, 0.999}) {
    const double klo = coupling_for_modulus(k + h);   // modulus decreases with K
    const double khi = coupling_for_modulus(k - h);
    const double t = 1.0;
    const double slope = std::abs(singular_free_energy(iso(khi), t) -
                                  singular_free_energy(iso(klo), t)) /
                         (2.0 * h);
    CHECK(slope > prev_slope);
    prev_slope = slope;
  }
}

TEST_CASE("free energy integral: second derivative blows up at the critical point") {
  const double bc = critical_beta();
  auto f_of_beta = [&](double beta) { return free_energy_integral(iso(beta), 1.0 / beta); };
  double prev = 0.0;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const double d2 =
        std::abs((f_of_beta(bc + h) - 2.0 * f_of_beta(bc) + f_of_beta(bc - h)) / (h * h));
    CHECK(d2 > prev);
    prev = d2;
  }
}

TEST_CASE("quadrature: non-convergence is reported, not silent") {
  // integrable singularity, but an absurd tolerance exhausts the depth cap
  auto f = [](double x) { return 1.0 / std::sqrt(x); };
  CHECK_THROWS_AS(integrate_adaptive(f, 0.0, 1.0, 1e-14), QuadratureError);
}

TEST_CASE("couplings must be positive") {
  CHECK_THROWS_AS(free_energy_integral({0.0, 0.3}, 1.0), std::domain_error);
  CHECK_THROWS_AS(free_energy_finite({0.3, -0.1}, 1.0, 4), std::domain_error);
  CHECK_THROWS_AS(free_energy_finite(iso(0.3), 1.0, 0), std::invalid_argument);
}
