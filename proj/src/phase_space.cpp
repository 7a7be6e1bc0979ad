#include "catsim/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "catsim/math.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catsim {

namespace {

/// e^{-i phi n} rho e^{+i phi n}: phase-space rotation by phi.
Eigen::MatrixXcd rotate_raw(const Eigen::MatrixXcd& rho, double phi) {
  const int d = static_cast<int>(rho.rows());
  Eigen::VectorXcd ph(d);
  for (int n = 0; n < d; ++n) ph(n) = std::exp(Complex(0.0, -phi * n));
  return ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
}

double second_moment(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& op) {
  return (rho * op).trace().real();
}

/// Fidelity of rho with the CSS of real amplitude alpha, assuming the state
/// has already been aligned so the superposition axis is the q axis.
double css_fidelity_aligned(const DensityMatrix& rho, double alpha, Parity parity) {
  PureState c = css_state(Complex(alpha, 0.0), parity, FockDim(rho.dim()));
  return fidelity(rho, c);
}

}  // namespace

PhaseSpaceGrid default_grid_for_dim(int dim, int points) {
  double lim = std::min(5.0, std::sqrt(static_cast<double>(dim)));
  PhaseSpaceGrid grid{-lim, lim, -lim, lim, points, points};
  return grid;
}

void PhaseSpaceGrid::validate() const {
  if (!(q_min < q_max) || !(p_min < p_max)) {
    throw std::invalid_argument("PhaseSpaceGrid: ranges must be increasing");
  }
  if (n_q < 2 || n_p < 2) {
    throw std::invalid_argument("PhaseSpaceGrid: need at least 2 points per axis");
  }
}

double wigner(const DensityMatrix& rho, double q, double p) {
  const int d = rho.dim();
  if (0.5 * (q * q + p * p) > double(d)) {
    throw std::invalid_argument("wigner: point outside truncation validity");
  }
  // W = (1/pi) tr[rho D(2 alpha) P] expanded in closed form: with
  // x = |2 alpha|^2 = 2(q^2+p^2) and phase phi,
  //   W = (1/pi) sum_k sum_n (-1)^n T(n,k) * (k==0 ? rho_nn
  //                                                : 2 Re(rho_{n,n+k} e^{i k phi}))
  //   T(n,k) = e^{-x/2} x^{k/2} sqrt(n!/(n+k)!) L_n^{(k)}(x).
  // The state is an exact finite Fock sum, so this is exact up to roundoff;
  // all intermediates stay within double range for x <= 4 dim.
  const double x = 2.0 * (q * q + p * p);
  const double phi = std::atan2(p, q);
  const Eigen::MatrixXcd& m = rho.matrix();
  double w = 0.0;
  std::vector<double> lag(d);
  for (int k = 0; k < d; ++k) {
    if (x == 0.0 && k > 0) break;
    const int count = d - k;
    lag[0] = 1.0;
    if (count > 1) lag[1] = 1.0 + k - x;
    for (int n = 2; n < count; ++n) {
      lag[n] = ((2.0 * n - 1.0 + k - x) * lag[n - 1] - (n - 1.0 + k) * lag[n - 2]) / n;
    }
    const Complex phase = std::exp(Complex(0.0, k * phi));
    for (int n = 0; n < count; ++n) {
      double logpref = -0.5 * x - 0.5 * (math::log_factorial(n + k) - math::log_factorial(n));
      if (k > 0) logpref += 0.5 * k * std::log(x);
      double t = std::exp(logpref) * lag[n];
      double sign = (n % 2 == 0) ? 1.0 : -1.0;
      if (k == 0) {
        w += sign * t * m(n, n).real();
      } else {
        w += sign * t * 2.0 * (m(n, n + k) * phase).real();
      }
    }
  }
  return w / M_PI;
}

Eigen::MatrixXd wigner_grid_values(const DensityMatrix& rho, const PhaseSpaceGrid& grid) {
  grid.validate();
  Eigen::MatrixXd values(grid.n_q, grid.n_p);
  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < grid.n_q; ++i) {
    try {
      for (int j = 0; j < grid.n_p; ++j) {
        values(i, j) = wigner(rho, grid.q(i), grid.p(j));
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return values;
}

WignerMin wigner_min(const DensityMatrix& rho, const PhaseSpaceGrid& grid,
                     const Eigen::MatrixXd& values) {
  int mi = 0, mj = 0;
  double w = values(0, 0);
  for (int i = 0; i < grid.n_q; ++i) {
    for (int j = 0; j < grid.n_p; ++j) {
      if (values(i, j) < w) {
        w = values(i, j);
        mi = i;
        mj = j;
      }
    }
  }
  WignerMin result{w, grid.q(mi), grid.p(mj)};
  if (mi == 0 || mj == 0 || mi == grid.n_q - 1 || mj == grid.n_p - 1) {
    return result;  // boundary minimum, no local fit
  }
  // Bi-quadratic least squares on the 3x3 neighborhood:
  // W ~ c0 + c1 u + c2 v + c3 u^2 + c4 uv + c5 v^2 around the minimal cell.
  const double hq = grid.q(1) - grid.q(0);
  const double hp = grid.p(1) - grid.p(0);
  Eigen::MatrixXd a(9, 6);
  Eigen::VectorXd b(9);
  int row = 0;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      double u = di * hq, v = dj * hp;
      a.row(row) << 1.0, u, v, u * u, u * v, v * v;
      b(row) = values(mi + di, mj + dj);
      ++row;
    }
  }
  Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  Eigen::Matrix2d hess;
  hess << 2.0 * c(3), c(4), c(4), 2.0 * c(5);
  if (hess(0, 0) > 0.0 && hess.determinant() > 0.0) {
    Eigen::Vector2d step = hess.ldlt().solve(Eigen::Vector2d(-c(1), -c(2)));
    if (std::abs(step(0)) <= hq && std::abs(step(1)) <= hp) {
      double qr = grid.q(mi) + step(0);
      double pr = grid.p(mj) + step(1);
      double wr = wigner(rho, qr, pr);
      if (wr < result.w_min) result = WignerMin{wr, qr, pr};
    }
  }
  return result;
}

WignerMin wigner_min(const DensityMatrix& rho, const PhaseSpaceGrid& grid) {
  return wigner_min(rho, grid, wigner_grid_values(rho, grid));
}

double quad_pdf(const DensityMatrix& rho, double theta, double x) {
  const int d = rho.dim();
  std::vector<double> psi(d);
  math::oscillator_psi(x, psi);
  const Eigen::MatrixXcd& m = rho.matrix();
  double val = 0.0;
  for (int n = 0; n < d; ++n) val += psi[n] * psi[n] * m(n, n).real();
  for (int mdx = 0; mdx < d; ++mdx) {
    for (int n = mdx + 1; n < d; ++n) {
      Complex ph = std::exp(Complex(0.0, (n - mdx) * theta));
      val += 2.0 * psi[mdx] * psi[n] * (m(mdx, n) * ph).real();
    }
  }
  return std::max(val, 0.0);
}

CssFit nearest_css(const DensityMatrix& rho) {
  const int d = rho.dim();
  const FockDim fd(d);
  const Eigen::MatrixXcd q = position_operator(fd);
  const Eigen::MatrixXcd p = momentum_operator(fd);

  // Align the principal axis of the quadrature covariance with q.
  double mqq = second_moment(rho.matrix(), q * q);
  double mpp = second_moment(rho.matrix(), p * p);
  double mqp = 0.5 * second_moment(rho.matrix(), q * p + p * q);
  double axis = 0.5 * std::atan2(2.0 * mqp, mqq - mpp);
  double best_phi = 0.0, best_var = -1.0;
  for (double phi : {axis, -axis, axis + M_PI / 2.0, -axis - M_PI / 2.0}) {
    Eigen::MatrixXcd rot = rotate_raw(rho.matrix(), phi);
    double var = second_moment(rot, q * q);
    if (var > best_var) {
      best_var = var;
      best_phi = phi;
    }
  }
  DensityMatrix aligned(rotate_raw(rho.matrix(), best_phi));

  const double n_bar = mean_photon(rho);
  // Search amplitudes up to sqrt(2 <n>) + 1, capped by the CSS constructor's
  // truncation guard |alpha|^2 <= dim/4.
  const double alpha_max =
      std::min(std::sqrt(2.0 * n_bar) + 1.0, std::sqrt(d / 4.0) - 1e-9);
  const double alpha_min = 1e-6;
  const int n_scan = 64;

  CssFit best{Complex(0.0), Parity::Even, -1.0, false};
  for (Parity parity : {Parity::Even, Parity::Odd}) {
    // Coarse scan, then golden-section refinement in the best bracket.
    std::vector<double> fs(n_scan);
    int arg = 0;
    for (int i = 0; i < n_scan; ++i) {
      double al = alpha_min + (alpha_max - alpha_min) * i / (n_scan - 1);
      fs[i] = css_fidelity_aligned(aligned, al, parity);
      if (fs[i] > fs[arg]) arg = i;
    }
    // Flat-optimum detection: a run of scan points within 1e-9 of the max.
    int run_lo = arg, run_hi = arg;
    while (run_lo > 0 && fs[arg] - fs[run_lo - 1] < 1e-9) --run_lo;
    while (run_hi < n_scan - 1 && fs[arg] - fs[run_hi + 1] < 1e-9) ++run_hi;
    bool degenerate = (run_hi - run_lo) >= 1;
    if (degenerate) arg = run_lo;  // smallest amplitude in the flat region

    double step = (alpha_max - alpha_min) / (n_scan - 1);
    double lo = std::max(alpha_min, alpha_min + step * (arg - 1));
    double hi = std::min(alpha_max, alpha_min + step * (arg + 1));
    while (hi - lo > 1e-4) {
      double m1 = lo + 0.381966 * (hi - lo);
      double m2 = hi - 0.381966 * (hi - lo);
      if (css_fidelity_aligned(aligned, m1, parity) <
          css_fidelity_aligned(aligned, m2, parity)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    double al = 0.5 * (lo + hi);
    double f = css_fidelity_aligned(aligned, al, parity);
    if (f > best.fidelity) {
      best.fidelity = f;
      best.parity = parity;
      best.alpha = Complex(al, 0.0);
      best.degenerate = degenerate;
    }
  }

  // Undo the alignment: the CSS axis in the original frame carries the
  // rotation phase. Pick the sign that actually maximizes the fidelity.
  double al = best.alpha.real();
  Complex c1 = al * std::exp(Complex(0.0, best_phi));
  Complex c2 = al * std::exp(Complex(0.0, -best_phi));
  double f1 = fidelity(rho, css_state(c1, best.parity, fd));
  double f2 = fidelity(rho, css_state(c2, best.parity, fd));
  best.alpha = (f1 >= f2) ? c1 : c2;
  best.fidelity = std::max(f1, f2);
  return best;
}

double max_coherent_fidelity(double alpha, Parity parity) {
  if (!(alpha > 0.0)) throw std::invalid_argument("max_coherent_fidelity: alpha must be > 0");
  // |<beta|css>|^2 with everything real; the optimal coherent amplitude is
  // real and positive once the CSS axis is taken as the real axis.
  const double sign = (parity == Parity::Even) ? 1.0 : -1.0;
  const double norm2 = 1.0 / (2.0 * (1.0 + sign * std::exp(-2.0 * alpha * alpha)));
  auto overlap = [&](double beta) {
    double g = std::exp(-0.5 * (beta - alpha) * (beta - alpha)) +
               sign * std::exp(-0.5 * (beta + alpha) * (beta + alpha));
    return norm2 * g * g;
  };
  double lo = 0.0, hi = alpha + 4.0, best = 0.0, arg = 0.0;
  const int n_scan = 512;
  for (int i = 0; i <= n_scan; ++i) {
    double b = lo + (hi - lo) * i / n_scan;
    double f = overlap(b);
    if (f > best) {
      best = f;
      arg = b;
    }
  }
  double a = std::max(lo, arg - (hi - lo) / n_scan);
  double b = std::min(hi, arg + (hi - lo) / n_scan);
  while (b - a > 1e-10) {
    double m1 = a + 0.381966 * (b - a);
    double m2 = b - 0.381966 * (b - a);
    if (overlap(m1) < overlap(m2)) {
      a = m1;
    } else {
      b = m2;
    }
  }
  return overlap(0.5 * (a + b));
}

double distinguishability_p0(double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("distinguishability_p0: alpha must be >= 0");
  return -std::expm1(-2.0 * alpha * alpha);
}

}  // namespace catsim
