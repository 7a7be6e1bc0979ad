#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

namespace catsim {

using Complex = std::complex<double>;

/// Generic operator in the truncated Fock basis (annihilation, Kraus
/// elements, POVM effects, ...).
using FockOperator = Eigen::MatrixXcd;

/// Truncation dimension of the Fock space: basis states |0> .. |dim-1>.
/// All states and operators in one computation must share the same FockDim.
struct FockDim {
  explicit FockDim(int d);
  int dim;

  friend bool operator==(FockDim a, FockDim b) { return a.dim == b.dim; }
};

enum class Parity { Even, Odd };

inline const char* parity_name(Parity p) { return p == Parity::Even ? "even" : "odd"; }

/// Normalized pure state. Constructors renormalize after truncation and
/// record the discarded tail weight.
class PureState {
 public:
  explicit PureState(Eigen::VectorXcd amplitudes, double discarded_tail = 0.0);

  int dim() const { return static_cast<int>(amp_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }
  Complex amplitude(int n) const { return amp_(n); }

  /// Probability weight that was dropped by truncation, before renormalization.
  double discarded_tail() const { return tail_; }

 private:
  Eigen::VectorXcd amp_;
  double tail_;
};

/// Hermitian, unit-trace, positive-semidefinite matrix in the truncated
/// Fock basis. Validated on construction: ||rho - rho^dag||_max <= 1e-10,
/// |tr - 1| <= 1e-8, min eigenvalue >= -1e-8.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd elements);
  static DensityMatrix from_pure(const PureState& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Complex operator()(int m, int n) const { return m_(m, n); }

 private:
  Eigen::MatrixXcd m_;
};

/// Squeezed-source description: relative minimum quadrature variance in dB
/// (<= 0) and the loss the squeezed state suffers before the subtraction
/// beamsplitter. Source purity is 1 - gamma_s.
struct SqueezeParams {
  double v0_db = 0.0;
  double gamma_s = 0.0;

  SqueezeParams() = default;
  SqueezeParams(double v0, double gs);
};

// State constructors -------------------------------------------------------

PureState fock_state(int n, FockDim d);

/// |alpha>, amplitudes alpha^n e^{-|alpha|^2/2}/sqrt(n!), renormalized after
/// truncation. Requires |alpha|^2 <= dim/4 so the truncated tail is small.
PureState coherent_state(Complex alpha, FockDim d);

/// Squeezed vacuum with squeezing parameter r >= 0; even amplitudes
/// c_{2k} ~ (-tanh r)^k sqrt((2k)!)/(2^k k!). The minimum-variance
/// quadrature is theta = 0 with variance (1/2) e^{-2r}.
PureState squeezed_vacuum(double r, FockDim d);

/// Normalized |-alpha> + |alpha> (even) or |-alpha> - |alpha> (odd).
PureState css_state(Complex alpha, Parity parity, FockDim d);

// Functionals ---------------------------------------------------------------

/// <psi| rho |psi>, clamped to [0, 1] against roundoff.
double fidelity(const DensityMatrix& rho, const PureState& psi);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 between mixed
/// states; reduces to <psi|rho|psi> when one argument is pure.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

double mean_photon(const DensityMatrix& rho);
double mean_photon(const PureState& psi);

/// tr(rho^2).
double purity(const DensityMatrix& rho);

// Basic operators -----------------------------------------------------------

FockOperator annihilation_operator(FockDim d);
FockOperator number_operator(FockDim d);
/// q = (a + a^dag)/sqrt(2); vacuum variance 1/2, [q, p] = i.
FockOperator position_operator(FockDim d);
FockOperator momentum_operator(FockDim d);

/// exp(alpha a^dag - conj(alpha) a), built by eigendecomposition of the
/// Hermitian generator so the result is unitary on the truncated space.
FockOperator displacement_operator(Complex alpha, FockDim d);

/// Phase-space rotation exp(-i phi n^hat).
FockOperator rotation_operator(double phi, FockDim d);

}  // namespace catsim
