#include <doctest.h>

#include <cmath>
#include <random>

#include "catsim/fock.hpp"
#include "catsim/optics.hpp"

using namespace catsim;

namespace {

DensityMatrix random_mixed_state(int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(gen), g(gen));
  }
  Eigen::MatrixXcd m = a * a.adjoint();
  m /= m.trace().real();
  return DensityMatrix(m);
}

}  // namespace

TEST_CASE("fock_state basics") {
  FockDim d(10);
  CHECK(mean_photon(fock_state(0, d)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mean_photon(fock_state(1, d)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean_photon(fock_state(9, d)) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK_THROWS(fock_state(10, d));
  CHECK_THROWS(fock_state(-1, d));
  CHECK_THROWS(FockDim(1));
}

TEST_CASE("coherent_state amplitudes and truncation") {
  CHECK((coherent_state(0.0, FockDim(20)).amplitudes() -
         fock_state(0, FockDim(20)).amplitudes())
            .norm() == doctest::Approx(0.0).epsilon(1e-14));

  // mean photon against the closed form |alpha|^2
  PureState c1 = coherent_state(1.0, FockDim(20));
  CHECK(mean_photon(c1) == doctest::Approx(1.0).epsilon(1e-6));

  // ground-state probability e^{-|alpha|^2}
  PureState c132 = coherent_state(1.32, FockDim(25));
  CHECK(std::norm(c132.amplitude(0)) ==
        doctest::Approx(std::exp(-1.32 * 1.32)).epsilon(1e-9));

  CHECK_THROWS(coherent_state(3.0, FockDim(16)));  // |alpha|^2 > dim/4
}

TEST_CASE("coherent_state truncation error halves from 4|a|^2 to 8|a|^2 levels") {
  const double alpha = 1.5;
  const double n_exact = alpha * alpha;  // 2.25
  double e1 = std::abs(mean_photon(coherent_state(alpha, FockDim(9))) - n_exact);
  double e2 = std::abs(mean_photon(coherent_state(alpha, FockDim(18))) - n_exact);
  CHECK(e2 <= e1 / 2.0);
}

TEST_CASE("squeezed_vacuum expansion") {
  CHECK((squeezed_vacuum(0.0, FockDim(10)).amplitudes() -
         fock_state(0, FockDim(10)).amplitudes())
            .norm() == doctest::Approx(0.0).epsilon(1e-14));

  double r = db_to_r(-6.8);
  PureState sq = squeezed_vacuum(r, FockDim(30));
  CHECK(mean_photon(sq) == doctest::Approx(std::sinh(r) * std::sinh(r)).epsilon(1e-4));
  for (int n = 1; n < 30; n += 2) {
    CHECK(std::abs(sq.amplitude(n)) == 0.0);
  }
  CHECK(sq.discarded_tail() < 1e-6);
  CHECK(sq.discarded_tail() > 0.0);

  CHECK_THROWS(squeezed_vacuum(1.5, FockDim(20)));  // tail guard
  CHECK_THROWS(squeezed_vacuum(-0.1, FockDim(20)));
}

TEST_CASE("css_state parity structure and mean photon") {
  PureState even0 = css_state(0.0, Parity::Even, FockDim(10));
  CHECK(std::abs(even0.amplitude(0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(css_state(0.0, Parity::Odd, FockDim(10)));

  // odd CSS mean photon: alpha^2 coth(alpha^2)
  double a = 1.76;
  PureState odd = css_state(a, Parity::Odd, FockDim(30));
  double coth = 1.0 / std::tanh(a * a);
  CHECK(mean_photon(odd) == doctest::Approx(a * a * coth).epsilon(1e-7));

  PureState odd132 = css_state(1.32, Parity::Odd, FockDim(25));
  for (int n = 0; n < 25; n += 2) CHECK(std::norm(odd132.amplitude(n)) == 0.0);
  PureState even116 = css_state(1.16, Parity::Even, FockDim(25));
  for (int n = 1; n < 25; n += 2) CHECK(std::norm(even116.amplitude(n)) == 0.0);

  // even CSS mean photon: alpha^2 tanh(alpha^2)
  CHECK(mean_photon(even116) ==
        doctest::Approx(1.16 * 1.16 * std::tanh(1.16 * 1.16)).epsilon(1e-7));
}

TEST_CASE("fidelity with pure states") {
  FockDim d(20);
  PureState psi = coherent_state(0.7, d);
  CHECK(fidelity(DensityMatrix::from_pure(psi), psi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(DensityMatrix::from_pure(fock_state(0, d)), fock_state(1, d)) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS(fidelity(DensityMatrix::from_pure(fock_state(0, FockDim(10))),
                        fock_state(0, FockDim(12))));
}

TEST_CASE("fidelity is linear in rho") {
  FockDim d(12);
  DensityMatrix r1 = random_mixed_state(12, 11);
  DensityMatrix r2 = random_mixed_state(12, 22);
  PureState psi = css_state(1.1, Parity::Odd, d);
  double f1 = fidelity(r1, psi);
  double f2 = fidelity(r2, psi);
  for (double lam : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    DensityMatrix mix(lam * r1.matrix() + (1.0 - lam) * r2.matrix());
    CHECK(std::abs(fidelity(mix, psi) - (lam * f1 + (1.0 - lam) * f2)) < 1e-12);
  }
}

TEST_CASE("mixed-state fidelity reduces to the pure overlap") {
  FockDim d(16);
  PureState psi = css_state(0.9, Parity::Even, d);
  DensityMatrix rho = random_mixed_state(16, 33);
  CHECK(fidelity(rho, DensityMatrix::from_pure(psi)) ==
        doctest::Approx(fidelity(rho, psi)).epsilon(1e-6));
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mean_photon and purity") {
  FockDim d(30);
  CHECK(mean_photon(DensityMatrix::from_pure(fock_state(3, FockDim(10)))) ==
        doctest::Approx(3.0).epsilon(1e-12));

  double r = db_to_r(-6.8);
  double gamma = 0.36;
  DensityMatrix lossy = LossChannel(gamma).apply(DensityMatrix::from_pure(squeezed_vacuum(r, d)));
  double expect = (1.0 - gamma) * mean_photon(squeezed_vacuum(r, d));
  CHECK(mean_photon(lossy) == doctest::Approx(expect).epsilon(1e-8));

  CHECK(purity(DensityMatrix::from_pure(coherent_state(0.5, FockDim(12)))) ==
        doctest::Approx(1.0).epsilon(1e-10));

  Eigen::MatrixXcd half = Eigen::MatrixXcd::Zero(4, 4);
  half(0, 0) = 0.5;
  half(1, 1) = 0.5;
  CHECK(purity(DensityMatrix(half)) == doctest::Approx(0.5).epsilon(1e-12));

  // two routes: tr(rho^2) vs sum of squared eigenvalues
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lossy.matrix(), Eigen::EigenvaluesOnly);
  double via_eigs = es.eigenvalues().array().square().sum();
  CHECK(purity(lossy) == doctest::Approx(via_eigs).epsilon(1e-10));
  CHECK(purity(lossy) > 0.0);
  CHECK(purity(lossy) < 1.0);
}

TEST_CASE("DensityMatrix invariants are enforced") {
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(3, 3);
  bad(0, 1) = 1.0;  // not Hermitian
  bad(0, 0) = 1.0;
  CHECK_THROWS(DensityMatrix(bad));

  Eigen::MatrixXcd off_trace = Eigen::MatrixXcd::Identity(3, 3);
  CHECK_THROWS(DensityMatrix(off_trace));  // trace 3

  Eigen::MatrixXcd indefinite = Eigen::MatrixXcd::Zero(2, 2);
  indefinite(0, 0) = 1.5;
  indefinite(1, 1) = -0.5;
  CHECK_THROWS(DensityMatrix(indefinite));
}

TEST_CASE("displacement operator is unitary and displaces vacuum") {
  FockDim d(25);
  Complex alpha(1.0, 0.5);
  FockOperator disp = displacement_operator(alpha, d);
  CHECK((disp * disp.adjoint() - Eigen::MatrixXcd::Identity(25, 25)).cwiseAbs().maxCoeff() <
        1e-12);
  Eigen::VectorXcd displaced = disp * fock_state(0, d).amplitudes();
  Eigen::VectorXcd expect = coherent_state(alpha, d).amplitudes();
  CHECK((displaced - expect).norm() < 1e-9);
}

TEST_CASE("rotation operator rotates coherent states") {
  FockDim d(22);
  double phi = 0.8;
  Eigen::VectorXcd rotated = rotation_operator(phi, d) * coherent_state(1.1, d).amplitudes();
  Eigen::VectorXcd expect = coherent_state(1.1 * std::exp(Complex(0.0, -phi)), d).amplitudes();
  CHECK((rotated - expect).norm() < 1e-9);
}
