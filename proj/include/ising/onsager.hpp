#ifndef ISING_ONSAGER_HPP
#define ISING_ONSAGER_HPP

namespace ising {

// Dimensionless couplings K = beta*J (horizontal) and L = beta*J' (vertical).
struct AnisotropicCouplings {
  double big_k = 0.0;
  double big_l = 0.0;
};

// Modulus k = 1 / (sinh 2K sinh 2L); equals 1 on the critical manifold.
double ising_modulus(const AnisotropicCouplings& c);

// Complete elliptic integral of the first kind with modulus k (not the
// parameter m = k^2), via the arithmetic-geometric mean, <= 1e-12 relative.
// Throws std::domain_error for k >= 1 where the integral diverges.
double elliptic_k(double k);

// Exact internal energy per site of the isotropic square lattice:
//   u(beta) = -coth(2 beta J) [1 + (2/pi)(2 tanh^2(2 beta J) - 1) K(k)],
//   k = 2 sinh(2 beta J) / cosh^2(2 beta J), scaled by J.
// Two prefactor conventions for this formula circulate; this one is
// normalized so the T -> 0 limit is the per-site ground-state energy -2J.
// At the critical point the removable 0 * inf product is handled by
// averaging the evaluations at beta_c (1 +/- 1e-9).
double internal_energy_exact(double beta, double j = 1.0);

// beta_c = ln(1 + sqrt 2) / (2 J).
double critical_beta(double j = 1.0);

// Free energy per site from the integral representation
//   f = -(k_B T / 2 pi) Int_0^pi ln[2 (cosh 2K cosh 2L
//        + k^{-1} sqrt(1 + k^2 - 2 k cos 2 theta))] d theta,  k_B = 1,
// evaluated adaptively to absolute tolerance 1e-10.
double free_energy_integral(const AnisotropicCouplings& c, double temperature);

// Finite transfer-matrix form: the maximum eigenvalue factorizes over the
// characteristic angles theta_j = pi (j - 1/2) / (2p), j = 1..2p, with
// coefficients c_j = k^{-1} sqrt(1 + k^2 - 2 k cos 2 theta_j), giving
//   f = -(k_B T / 4p) sum_j ln[2 (cosh 2K cosh 2L + c_j)].
// Converges to free_energy_integral as p grows.
double free_energy_finite(const AnisotropicCouplings& c, double temperature, int p);

// Closed-form singular part
//   f_s = -k_B T (1+k)(1-k) / (4 pi k cosh 2K cosh 2L) ln((1+k)/|1-k|);
// returns 0 at k = 1 (the non-analyticity lives in the derivatives). The
// magnitude in the logarithm extends the expression to the k > 1 side.
double singular_free_energy(const AnisotropicCouplings& c, double temperature);

}  // namespace ising

#endif  // ISING_ONSAGER_HPP
