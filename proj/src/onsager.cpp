#include "ising/onsager.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ising/quadrature.hpp"

namespace ising {

namespace {

constexpr double kPi = std::numbers::pi;

void check_couplings(const AnisotropicCouplings& c) {
  if (!(c.big_k > 0.0) || !(c.big_l > 0.0))
    throw std::domain_error("onsager: couplings K, L must be > 0");
}

// J = 1 internal energy away from the critical point.
double internal_energy_j1(double beta) {
  const double ch = std::cosh(2.0 * beta);
  const double sh = std::sinh(2.0 * beta);
  const double th = std::tanh(2.0 * beta);
  double k = 2.0 * sh / (ch * ch);
  // k touches 1 only at beta_c; clamp guards the removable singularity
  // against rounding when callers evaluate arbitrarily close to it.
  if (k > 1.0 - 1e-15) k = 1.0 - 1e-15;
  const double bracket = 1.0 + (2.0 / kPi) * (2.0 * th * th - 1.0) * elliptic_k(k);
  return -(ch / sh) * bracket;
}

}  // namespace

double ising_modulus(const AnisotropicCouplings& c) {
  check_couplings(c);
  return 1.0 / (std::sinh(2.0 * c.big_k) * std::sinh(2.0 * c.big_l));
}

double elliptic_k(double k) {
  if (!(k >= 0.0)) throw std::domain_error("elliptic_k: modulus must be >= 0");
  if (k >= 1.0) throw std::domain_error("elliptic_k: diverges for modulus >= 1");
  double a = 1.0;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  while (std::abs(a - b) > 0.5e-15 * a) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return kPi / (2.0 * a);
}

double internal_energy_exact(double beta, double j) {
  if (!(beta > 0.0)) throw std::domain_error("internal_energy_exact: beta must be > 0");
  if (!(j > 0.0)) throw std::domain_error("internal_energy_exact: j must be > 0");
  const double bj = beta * j;
  const double bc = 0.5 * std::log(1.0 + std::sqrt(2.0));
  if (std::abs(bj - bc) < 1e-12) {
    // two-sided limit through the critical point
    return j * 0.5 * (internal_energy_j1(bc * (1.0 - 1e-9)) +
                      internal_energy_j1(bc * (1.0 + 1e-9)));
  }
  return j * internal_energy_j1(bj);
}

double critical_beta(double j) {
  if (!(j > 0.0)) throw std::domain_error("critical_beta: j must be > 0");
  return std::log(1.0 + std::sqrt(2.0)) / (2.0 * j);
}

double free_energy_integral(const AnisotropicCouplings& c, double temperature) {
  check_couplings(c);
  if (!(temperature > 0.0))
    throw std::domain_error("free_energy_integral: temperature must be > 0");
  const double k = ising_modulus(c);
  const double a = std::cosh(2.0 * c.big_k) * std::cosh(2.0 * c.big_l);
  const double inv_k = std::sinh(2.0 * c.big_k) * std::sinh(2.0 * c.big_l);
  const auto integrand = [&](double theta) {
    const double arg = 1.0 + k * k - 2.0 * k * std::cos(2.0 * theta);
    return std::log(2.0 * (a + inv_k * std::sqrt(std::max(arg, 0.0))));
  };
  const double integral = integrate_adaptive(integrand, 0.0, kPi, 1e-10);
  return -(temperature / (2.0 * kPi)) * integral;
}

double free_energy_finite(const AnisotropicCouplings& c, double temperature, int p) {
  check_couplings(c);
  if (!(temperature > 0.0))
    throw std::domain_error("free_energy_finite: temperature must be > 0");
  if (p < 1) throw std::invalid_argument("free_energy_finite: p must be >= 1");
  const double k = ising_modulus(c);
  const double a = std::cosh(2.0 * c.big_k) * std::cosh(2.0 * c.big_l);
  const double inv_k = std::sinh(2.0 * c.big_k) * std::sinh(2.0 * c.big_l);
  double sum = 0.0;
  for (int j = 1; j <= 2 * p; ++j) {
    const double theta = kPi * (j - 0.5) / (2.0 * p);
    const double arg = 1.0 + k * k - 2.0 * k * std::cos(2.0 * theta);
    const double cj = inv_k * std::sqrt(std::max(arg, 0.0));
    sum += std::log(2.0 * (a + cj));
  }
  return -(temperature / (4.0 * p)) * sum;
}

double singular_free_energy(const AnisotropicCouplings& c, double temperature) {
  check_couplings(c);
  if (!(temperature > 0.0))
    throw std::domain_error("singular_free_energy: temperature must be > 0");
  const double k = ising_modulus(c);
  if (!(k > 0.0)) throw std::domain_error("singular_free_energy: k must be > 0");
  if (k == 1.0) return 0.0;
  const double a = std::cosh(2.0 * c.big_k) * std::cosh(2.0 * c.big_l);
  const double log_term = std::log((1.0 + k) / std::abs(1.0 - k));
  return -(temperature * (1.0 + k) * (1.0 - k)) / (4.0 * kPi * k * a) * log_term;
}

}  // namespace ising
