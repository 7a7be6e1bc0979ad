#include "catsim/math.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace catsim::math {

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  // Golub-Welsch: Jacobi matrix for Hermite polynomials has zero diagonal
  // and off-diagonal sqrt(k/2).
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(k / 2.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.scaled_weights.resize(n);
  // Christoffel form: w_i e^{x_i^2} = 1 / sum_{k<n} psi_k(x_i)^2 with the
  // oscillator functions psi_k; stays accurate where the raw weights underflow.
  std::vector<double> psi(n);
  for (int k = 0; k < n; ++k) {
    double x = es.eigenvalues()(k);
    rule.nodes[k] = x;
    oscillator_psi(x, psi);
    double sum = 0.0;
    for (double v : psi) sum += v * v;
    rule.scaled_weights[k] = 1.0 / sum;
    rule.weights[k] = rule.scaled_weights[k] * std::exp(-x * x);
  }
  return rule;
}

void oscillator_psi(double x, std::span<double> out) {
  const int d = static_cast<int>(out.size());
  if (d == 0) return;
  out[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (d > 1) out[1] = std::sqrt(2.0) * x * out[0];
  for (int n = 2; n < d; ++n) {
    out[n] = std::sqrt(2.0 / n) * x * out[n - 1] - std::sqrt((n - 1.0) / n) * out[n - 2];
  }
}

}  // namespace catsim::math
