#include "catsim/fock.hpp"

#include <cmath>
#include <stdexcept>

#include "catsim/math.hpp"

namespace catsim {

namespace {

constexpr double kHermTol = 1e-10;
constexpr double kTraceTol = 1e-8;
constexpr double kPsdTol = 1e-8;

}  // namespace

FockDim::FockDim(int d) : dim(d) {
  if (d < 2) throw std::invalid_argument("FockDim: dim must be >= 2");
}

PureState::PureState(Eigen::VectorXcd amplitudes, double discarded_tail)
    : amp_(std::move(amplitudes)), tail_(discarded_tail) {
  if (amp_.size() < 2) throw std::invalid_argument("PureState: dim must be >= 2");
  double n = amp_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("PureState: amplitudes have zero or non-finite norm");
  }
  amp_ /= n;
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd elements) : m_(std::move(elements)) {
  if (m_.rows() != m_.cols() || m_.rows() < 2) {
    throw std::invalid_argument("DensityMatrix: matrix must be square with dim >= 2");
  }
  double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kHermTol)) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (max deviation " +
                                std::to_string(herm) + ")");
  }
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
  double tr = m_.trace().real();
  if (!(std::abs(tr - 1.0) <= kTraceTol)) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) +
                                " deviates from 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
  double min_ev = es.eigenvalues().minCoeff();
  if (!(min_ev >= -kPsdTol)) {
    throw std::invalid_argument("DensityMatrix: not positive semidefinite (min eigenvalue " +
                                std::to_string(min_ev) + ")");
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

SqueezeParams::SqueezeParams(double v0, double gs) : v0_db(v0), gamma_s(gs) {
  if (v0_db > 0.0) throw std::invalid_argument("SqueezeParams: v0_db must be <= 0");
  if (gamma_s < 0.0 || gamma_s > 1.0) {
    throw std::invalid_argument("SqueezeParams: gamma_s must be in [0, 1]");
  }
}

PureState fock_state(int n, FockDim d) {
  if (n < 0 || n >= d.dim) throw std::invalid_argument("fock_state: n out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d.dim);
  v(n) = 1.0;
  return PureState(std::move(v), 0.0);
}

PureState coherent_state(Complex alpha, FockDim d) {
  double n_bar = std::norm(alpha);
  if (n_bar > d.dim / 4.0) {
    throw std::invalid_argument("coherent_state: |alpha|^2 > dim/4, truncation inadequate");
  }
  Eigen::VectorXcd v(d.dim);
  v(0) = std::exp(-0.5 * n_bar);
  for (int n = 1; n < d.dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
  double kept = v.squaredNorm();
  double tail = 1.0 - kept;
  return PureState(std::move(v), tail);
}

PureState squeezed_vacuum(double r, FockDim d) {
  if (r < 0.0) throw std::invalid_argument("squeezed_vacuum: r must be >= 0");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d.dim);
  double t = std::tanh(r);
  v(0) = 1.0 / std::sqrt(std::cosh(r));
  for (int k = 1; 2 * k < d.dim; ++k) {
    v(2 * k) = v(2 * k - 2) * (-t) * std::sqrt((2.0 * k - 1.0) / (2.0 * k));
  }
  double kept = v.squaredNorm();
  double tail = 1.0 - kept;
  if (!(tail < 1e-6)) {
    throw std::invalid_argument("squeezed_vacuum: truncated tail weight " +
                                std::to_string(tail) + " exceeds 1e-6 at dim " +
                                std::to_string(d.dim));
  }
  return PureState(std::move(v), tail);
}

PureState css_state(Complex alpha, Parity parity, FockDim d) {
  double n_bar = std::norm(alpha);
  if (n_bar > d.dim / 4.0) {
    throw std::invalid_argument("css_state: |alpha|^2 > dim/4, truncation inadequate");
  }
  if (alpha == 0.0 && parity == Parity::Odd) {
    throw std::invalid_argument("css_state: odd superposition vanishes at alpha = 0");
  }
  // |alpha> +/- |-alpha> keeps only one parity of the coherent expansion.
  Eigen::VectorXcd coh(d.dim);
  coh(0) = 1.0;
  for (int n = 1; n < d.dim; ++n) coh(n) = coh(n - 1) * alpha / std::sqrt(double(n));
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d.dim);
  int start = (parity == Parity::Even) ? 0 : 1;
  for (int n = start; n < d.dim; n += 2) v(n) = coh(n);
  // Tail against the closed-form norm of the untruncated superposition:
  // || |alpha> +/- |-alpha> ||^2 = 2(1 +/- e^{-2|alpha|^2}), and the kept
  // part carries 4 * sum_parity |alpha|^{2n}/n! * e^{-|alpha|^2} / that.
  double sign = (parity == Parity::Even) ? 1.0 : -1.0;
  double total = 0.5 * (1.0 + sign * std::exp(-2.0 * n_bar));  // e^{|a|^2}-scaled
  double kept_scaled = 0.0;
  for (int n = start; n < d.dim; n += 2) kept_scaled += std::norm(coh(n));
  double kept = kept_scaled * std::exp(-n_bar);
  double tail = 1.0 - kept / total;
  return PureState(std::move(v), tail);
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dim() != psi.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  double f = (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0).real();
  if (f < 0.0) f = (f > -1e-10) ? 0.0 : f;
  if (f > 1.0) f = (f < 1.0 + 1e-10) ? 1.0 : f;
  if (f < 0.0 || f > 1.0) {
    throw std::runtime_error("fidelity: value out of [0,1] beyond tolerance");
  }
  return f;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix());
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXcd sqrt_rho =
      es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  Eigen::MatrixXcd inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(inner, Eigen::EigenvaluesOnly);
  double sum = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  double f = sum * sum;
  return std::clamp(f, 0.0, 1.0);
}

double mean_photon(const DensityMatrix& rho) {
  double n = 0.0;
  for (int k = 0; k < rho.dim(); ++k) n += k * rho(k, k).real();
  return n;
}

double mean_photon(const PureState& psi) {
  double n = 0.0;
  for (int k = 0; k < psi.dim(); ++k) n += k * std::norm(psi.amplitude(k));
  return n;
}

double purity(const DensityMatrix& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

FockOperator annihilation_operator(FockDim d) {
  FockOperator a = FockOperator::Zero(d.dim, d.dim);
  for (int n = 1; n < d.dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

FockOperator number_operator(FockDim d) {
  FockOperator n = FockOperator::Zero(d.dim, d.dim);
  for (int k = 0; k < d.dim; ++k) n(k, k) = double(k);
  return n;
}

FockOperator position_operator(FockDim d) {
  FockOperator a = annihilation_operator(d);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

FockOperator momentum_operator(FockDim d) {
  FockOperator a = annihilation_operator(d);
  return (a - a.adjoint()) / Complex(0.0, std::sqrt(2.0));
}

FockOperator displacement_operator(Complex alpha, FockDim d) {
  FockOperator a = annihilation_operator(d);
  // G = alpha a^dag - conj(alpha) a is anti-Hermitian; exp(G) = exp(-iH), H = iG.
  Eigen::MatrixXcd h = Complex(0, 1) * (alpha * a.adjoint() - std::conj(alpha) * a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd ph(d.dim);
  for (int k = 0; k < d.dim; ++k) {
    ph(k) = std::exp(Complex(0.0, -es.eigenvalues()(k)));
  }
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

FockOperator rotation_operator(double phi, FockDim d) {
  FockOperator r = FockOperator::Zero(d.dim, d.dim);
  for (int n = 0; n < d.dim; ++n) r(n, n) = std::exp(Complex(0.0, -phi * n));
  return r;
}

}  // namespace catsim
