#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace catsim::math {

/// ln(n!) via lgamma; exact-enough for binomial weights at any n we use.
inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// sqrt of the binomial coefficient C(n, k), computed in log space.
inline double sqrt_binomial(int n, int k) {
  return std::exp(0.5 * (log_factorial(n) - log_factorial(k) - log_factorial(n - k)));
}

struct GaussHermiteRule {
  std::vector<double> nodes;    // roots of H_n
  std::vector<double> weights;  // weights for integral with e^{-x^2} measure
  // weights * e^{x^2}, computed stably (Christoffel form); use these when the
  // integrand already contains its own e^{-x^2} factor, as quadrature
  // distributions do. The raw weights underflow in relative accuracy at the
  // outer nodes, so multiplying them by e^{x^2} directly is not safe.
  std::vector<double> scaled_weights;
};

/// Gauss-Hermite nodes/weights (Golub-Welsch on the Jacobi matrix).
/// Integrates exp(-x^2) * poly(x) exactly for poly degree <= 2n-1.
GaussHermiteRule gauss_hermite(int n);

/// Harmonic-oscillator position eigenfunctions psi_n(x) for n = 0..out.size()-1,
/// convention psi_n(x) = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)); vacuum
/// quadrature variance is 1/2.
void oscillator_psi(double x, std::span<double> out);

}  // namespace catsim::math
