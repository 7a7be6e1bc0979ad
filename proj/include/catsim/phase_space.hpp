#pragma once

#include <Eigen/Dense>

#include "catsim/fock.hpp"

namespace catsim {

/// Rectangular phase-space grid. Defaults cover [-5, 5]^2 with 201 points
/// per axis.
struct PhaseSpaceGrid {
  double q_min = -5.0, q_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  int n_q = 201, n_p = 201;

  void validate() const;
  double q(int i) const { return q_min + (q_max - q_min) * i / (n_q - 1); }
  double p(int j) const { return p_min + (p_max - p_min) * j / (n_p - 1); }
};

/// Best ideal coherent-state superposition for a given state: amplitude,
/// parity, and the achieved fidelity.
struct CssFit {
  Complex alpha;
  Parity parity;
  double fidelity;
  /// Set when the fidelity was flat (within 1e-9) over an interval of
  /// amplitudes; the smallest |alpha| is reported then.
  bool degenerate = false;
};

/// Wigner function at one phase-space point, via the displaced-parity sum
/// W(q,p) = (1/pi) sum_n (-1)^n <n| D^dag rho D |n>, D = D((q+ip)/sqrt(2)).
/// Normalized so that the double integral of W over (q, p) is 1.
/// Requires (q^2 + p^2)/2 <= dim (truncation validity).
double wigner(const DensityMatrix& rho, double q, double p);

/// Wigner values on a grid; element (i, j) is W(q(i), p(j)).
Eigen::MatrixXd wigner_grid_values(const DensityMatrix& rho, const PhaseSpaceGrid& grid);

/// The default analysis grid, shrunk when the truncation dimension cannot
/// support the full +-5 span (every corner must satisfy the wigner guard).
PhaseSpaceGrid default_grid_for_dim(int dim, int points = 201);

struct WignerMin {
  double w_min;
  double q;
  double p;
};

/// Grid minimum refined by a bi-quadratic fit over the 3x3 neighborhood of
/// the minimal cell (skipped when the minimum sits on the grid boundary).
WignerMin wigner_min(const DensityMatrix& rho, const PhaseSpaceGrid& grid);
WignerMin wigner_min(const DensityMatrix& rho, const PhaseSpaceGrid& grid,
                     const Eigen::MatrixXd& values);

/// Quadrature distribution pr(x | theta) = <x_theta| rho |x_theta> with
/// oscillator eigenfunctions and phase factors e^{i n theta}.
double quad_pdf(const DensityMatrix& rho, double theta, double x);

/// Nearest ideal CSS by fidelity maximization. The state's principal
/// quadrature axis is aligned first (covariance diagonalization), reducing
/// the search to real amplitudes; the returned alpha carries the alignment
/// phase.
CssFit nearest_css(const DensityMatrix& rho);

/// Largest fidelity any coherent state (equivalently, any mixture of
/// coherent states) can have with the ideal CSS of the given amplitude and
/// parity. The optimum is attained at a real displacement along the CSS
/// axis, so a 1-D search over real beta suffices.
double max_coherent_fidelity(double alpha, Parity parity);

/// p0 = 1 - exp(-2 alpha^2): probability with which the two superposed
/// coherent states can be distinguished.
double distinguishability_p0(double alpha);

}  // namespace catsim
