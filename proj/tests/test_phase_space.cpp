#include <doctest.h>

#include <cmath>

#include "catsim/math.hpp"
#include "catsim/optics.hpp"
#include "catsim/phase_space.hpp"

using namespace catsim;

namespace {

const double kInvPi = 1.0 / M_PI;

DensityMatrix lossy_squeezed(int dim) {
  // -6.8 dB needs dim >= 28 for the source tail guard
  return prepare_squeezed(SqueezeParams(dim >= 28 ? -6.8 : -4.0, 0.36), FockDim(dim));
}

}  // namespace

TEST_CASE("wigner analytic anchors at the origin") {
  CHECK(wigner(DensityMatrix::from_pure(fock_state(0, FockDim(12))), 0.0, 0.0) ==
        doctest::Approx(kInvPi).epsilon(1e-10));
  CHECK(wigner(DensityMatrix::from_pure(fock_state(1, FockDim(12))), 0.0, 0.0) ==
        doctest::Approx(-kInvPi).epsilon(1e-10));
  CHECK(wigner(DensityMatrix::from_pure(css_state(1.76, Parity::Odd, FockDim(30))), 0.0,
               0.0) == doctest::Approx(-kInvPi).epsilon(1e-8));
}

TEST_CASE("wigner parity identity at the origin") {
  DensityMatrix rho = lossy_squeezed(20);
  double direct = 0.0;
  for (int n = 0; n < 20; ++n) {
    direct += ((n % 2 == 0) ? 1.0 : -1.0) * rho(n, n).real() / M_PI;
  }
  CHECK(wigner(rho, 0.0, 0.0) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("wigner rejects points outside truncation validity") {
  DensityMatrix vac = DensityMatrix::from_pure(fock_state(0, FockDim(10)));
  CHECK_THROWS(wigner(vac, 5.0, 5.0));  // (25+25)/2 > 10
}

TEST_CASE("wigner grid normalization") {
  PhaseSpaceGrid grid;  // default: [-5,5]^2, 201 points
  for (const DensityMatrix& rho :
       {DensityMatrix::from_pure(coherent_state(1.0, FockDim(26))),
        DensityMatrix::from_pure(css_state(1.32, Parity::Odd, FockDim(26)))}) {
    Eigen::MatrixXd w = wigner_grid_values(rho, grid);
    double dq = (grid.q_max - grid.q_min) / (grid.n_q - 1);
    double dp = (grid.p_max - grid.p_min) / (grid.n_p - 1);
    CHECK(w.sum() * dq * dp == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("wigner_min on vacuum and single photon") {
  PhaseSpaceGrid grid;
  WignerMin vac = wigner_min(DensityMatrix::from_pure(fock_state(0, FockDim(26))), grid);
  CHECK(vac.w_min >= 0.0);
  CHECK(vac.w_min < 1e-8);

  WignerMin one = wigner_min(DensityMatrix::from_pure(fock_state(1, FockDim(26))), grid);
  CHECK(one.w_min == doctest::Approx(-kInvPi).epsilon(1e-4));
  CHECK(std::abs(one.q) < 0.05);
  CHECK(std::abs(one.p) < 0.05);
}

TEST_CASE("quad_pdf of vacuum and squeezed vacuum") {
  DensityMatrix vac = DensityMatrix::from_pure(fock_state(0, FockDim(12)));
  for (double theta : {0.0, 1.1, 2.9}) {
    for (double x = -3.0; x <= 3.0; x += 0.5) {
      CHECK(quad_pdf(vac, theta, x) ==
            doctest::Approx(std::exp(-x * x) / std::sqrt(M_PI)).epsilon(1e-12));
    }
  }

  double r = db_to_r(-6.8);
  DensityMatrix sq = DensityMatrix::from_pure(squeezed_vacuum(r, FockDim(30)));
  double var = 0.5 * std::exp(-2.0 * r);
  for (double x = -0.8; x <= 0.8; x += 0.2) {
    double gauss = std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
    CHECK(quad_pdf(sq, 0.0, x) == doctest::Approx(gauss).epsilon(1e-3));
  }
  // Gaussian second moment via Gauss-Hermite quadrature
  math::GaussHermiteRule rule = math::gauss_hermite(64);
  double m2 = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    double x = rule.nodes[i];
    m2 += rule.scaled_weights[i] * x * x * quad_pdf(sq, 0.0, x);
  }
  CHECK(m2 == doctest::Approx(var).epsilon(5e-4));
}

TEST_CASE("wigner agrees with the displaced-parity route on interior points") {
  // independent evaluation: W = (1/pi) sum_n (-1)^n <n|D^dag rho D|n> with a
  // unitary displacement built by eigendecomposition; valid well inside the
  // truncation radius
  FockDim d(26);
  DensityMatrix rho = DensityMatrix::from_pure(css_state(1.3, Parity::Odd, d));
  for (double q : {-1.2, -0.7, 0.0, 0.9, 1.3}) {
    for (double p : {-1.1, 0.0, 0.8, 1.2}) {
      Complex alpha(q / std::sqrt(2.0), p / std::sqrt(2.0));
      FockOperator disp = displacement_operator(alpha, d);
      Eigen::MatrixXcd t = disp.adjoint() * rho.matrix() * disp;
      double w = 0.0;
      for (int n = 0; n < 26; ++n) w += ((n % 2 == 0) ? 1.0 : -1.0) * t(n, n).real();
      w /= M_PI;
      CHECK(std::abs(wigner(rho, q, p) - w) < 1e-9);
    }
  }
}

TEST_CASE("quad_pdf normalizes via Gauss-Hermite quadrature") {
  // pr(x|theta) = e^{-x^2} poly(x), so the rule is exact for dim <= 30.
  math::GaussHermiteRule rule = math::gauss_hermite(64);
  for (const DensityMatrix& rho :
       {lossy_squeezed(24), DensityMatrix::from_pure(css_state(1.3, Parity::Odd, FockDim(24)))}) {
    for (double theta : {0.0, 0.7, 2.1}) {
      double total = 0.0;
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        total += rule.scaled_weights[i] * quad_pdf(rho, theta, rule.nodes[i]);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("quad_pdf is the Radon transform of the Wigner function") {
  DensityMatrix rho = DensityMatrix::from_pure(css_state(1.32, Parity::Odd, FockDim(25)));
  const double angles[] = {0.1, 0.5, 0.9, 1.3, 1.7, 2.1, 2.5, 2.9};
  const double s_lim = 6.0;
  const int n_steps = 240;  // Simpson over the integration line
  for (double theta : angles) {
    for (double x : {-1.3, 0.4, 2.0}) {
      double h = 2.0 * s_lim / n_steps;
      double total = 0.0;
      for (int i = 0; i <= n_steps; ++i) {
        double s = -s_lim + i * h;
        double q = x * std::cos(theta) - s * std::sin(theta);
        double p = x * std::sin(theta) + s * std::cos(theta);
        double w = wigner(rho, q, p);
        double coeff = (i == 0 || i == n_steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        total += coeff * w;
      }
      total *= h / 3.0;
      CHECK(total == doctest::Approx(quad_pdf(rho, theta, x)).epsilon(1e-5));
    }
  }
}

TEST_CASE("nearest_css recovers an exact CSS") {
  DensityMatrix rho = DensityMatrix::from_pure(css_state(1.32, Parity::Odd, FockDim(25)));
  CssFit fit = nearest_css(rho);
  CHECK(fit.parity == Parity::Odd);
  CHECK(std::abs(fit.alpha) == doctest::Approx(1.32).epsilon(1e-3));
  CHECK(fit.fidelity == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(!fit.degenerate);
  // fidelity field is consistent with a fresh evaluation
  CHECK(fit.fidelity ==
        doctest::Approx(fidelity(rho, css_state(fit.alpha, fit.parity, FockDim(25))))
            .epsilon(1e-12));
}

TEST_CASE("nearest_css is invariant under phase-space rotation") {
  FockDim d(25);
  Eigen::MatrixXcd base = 0.8 * css_state(1.2, Parity::Odd, d).amplitudes() *
                              css_state(1.2, Parity::Odd, d).amplitudes().adjoint() +
                          0.2 * css_state(0.9, Parity::Even, d).amplitudes() *
                              css_state(0.9, Parity::Even, d).amplitudes().adjoint();
  DensityMatrix rho(base);
  CssFit ref = nearest_css(rho);

  double phi = 0.7;
  FockOperator rot = rotation_operator(phi, d);
  DensityMatrix rotated(rot * rho.matrix() * rot.adjoint());
  CssFit fit = nearest_css(rotated);
  CHECK(std::abs(fit.alpha) == doctest::Approx(std::abs(ref.alpha)).epsilon(1e-6));
  CHECK(fit.fidelity == doctest::Approx(ref.fidelity).epsilon(1e-6));
  CHECK(fit.parity == ref.parity);
}

TEST_CASE("nearest_css flags a flat optimum") {
  Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(8, 8) / 8.0;
  CssFit fit = nearest_css(DensityMatrix(mixed));
  CHECK(fit.degenerate);
  CHECK(std::abs(fit.alpha) < 0.1);
}

TEST_CASE("maximum coherent-state fidelity anchors") {
  CHECK(max_coherent_fidelity(1.32, Parity::Odd) == doctest::Approx(0.487).epsilon(0.011));
  CHECK(max_coherent_fidelity(1.16, Parity::Even) == doctest::Approx(0.552).epsilon(0.010));
  CHECK(max_coherent_fidelity(1.30, Parity::Even) == doctest::Approx(0.522).epsilon(0.010));
}

TEST_CASE("coherent ceiling approaches 1/2 from above (even) and below (odd)") {
  for (double a : {1.0, 1.5, 2.0, 2.5}) {
    CHECK(max_coherent_fidelity(a, Parity::Even) > 0.5);
    CHECK(max_coherent_fidelity(a, Parity::Odd) < 0.5);
  }
  CHECK_THROWS(max_coherent_fidelity(0.0, Parity::Even));
}

TEST_CASE("coherent ceiling agrees with the Fock-space route") {
  // independent route: scan |<beta|css>|^2 with truncated Fock inner products
  FockDim d(30);
  double alpha = 1.32;
  PureState cat = css_state(alpha, Parity::Odd, d);
  DensityMatrix cat_rho = DensityMatrix::from_pure(cat);
  double best = 0.0;
  for (double beta = 0.0; beta <= 2.6; beta += 0.002) {
    best = std::max(best, fidelity(cat_rho, coherent_state(beta, d)));
  }
  CHECK(max_coherent_fidelity(alpha, Parity::Odd) == doctest::Approx(best).epsilon(1e-5));
}

TEST_CASE("distinguishability probability") {
  CHECK(distinguishability_p0(0.0) == 0.0);
  CHECK(distinguishability_p0(1.52) == doctest::Approx(1.0 - std::exp(-2.0 * 1.52 * 1.52))
                                           .epsilon(1e-14));
  CHECK(distinguishability_p0(1.52) > 0.99);
  CHECK(distinguishability_p0(1.76) == doctest::Approx(1.0 - std::exp(-6.1952)).epsilon(1e-9));
  CHECK_THROWS(distinguishability_p0(-1.0));
}

TEST_CASE("PhaseSpaceGrid validation") {
  PhaseSpaceGrid bad;
  bad.q_min = 2.0;
  bad.q_max = -2.0;
  CHECK_THROWS(bad.validate());
  PhaseSpaceGrid tiny;
  tiny.n_q = 1;
  CHECK_THROWS(tiny.validate());
}
