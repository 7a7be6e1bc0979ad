#include "catsim/optics.hpp"

#include <cmath>
#include <stdexcept>

#include "catsim/math.hpp"

namespace catsim {

namespace {

/// Amplitude f(n, k) with A_k |n> = f(n,k) |n-k> for a loss gamma.
double loss_amp(int n, int k, double gamma) {
  if (k > n) return 0.0;
  if (gamma == 0.0) return k == 0 ? 1.0 : 0.0;
  if (gamma == 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(0.5 * (math::log_factorial(n) - math::log_factorial(k) -
                         math::log_factorial(n - k) + (n - k) * std::log1p(-gamma) +
                         k * std::log(gamma)));
}

}  // namespace

double db_to_r(double v0_db) {
  if (v0_db > 0.0) {
    throw std::invalid_argument("db_to_r: positive dB level is anti-squeezing");
  }
  return -v0_db * std::log(10.0) / 20.0;
}

LossChannel::LossChannel(double gamma) : gamma_(gamma) {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::invalid_argument("LossChannel: gamma must be in [0, 1]");
  }
}

Eigen::MatrixXcd LossChannel::apply_raw(const Eigen::MatrixXcd& rho) const {
  const int d = static_cast<int>(rho.rows());
  if (gamma_ == 0.0) return rho;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    // (A_k rho A_k^dag)_{mn} = f(m+k,k) f(n+k,k) rho_{m+k,n+k}
    for (int m = 0; m + k < d; ++m) {
      double fm = loss_amp(m + k, k, gamma_);
      if (fm == 0.0) continue;
      for (int n = 0; n + k < d; ++n) {
        out(m, n) += fm * loss_amp(n + k, k, gamma_) * rho(m + k, n + k);
      }
    }
  }
  return out;
}

Eigen::MatrixXcd LossChannel::apply_adjoint(const Eigen::MatrixXcd& x) const {
  const int d = static_cast<int>(x.rows());
  if (gamma_ == 0.0) return x;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    // (A_k^dag X A_k)_{mn} = f(m,k) f(n,k) X_{m-k,n-k}
    for (int m = k; m < d; ++m) {
      double fm = loss_amp(m, k, gamma_);
      if (fm == 0.0) continue;
      for (int n = k; n < d; ++n) {
        out(m, n) += fm * loss_amp(n, k, gamma_) * x(m - k, n - k);
      }
    }
  }
  return out;
}

DensityMatrix LossChannel::apply(const DensityMatrix& rho) const {
  return DensityMatrix(apply_raw(rho.matrix()));
}

std::vector<FockOperator> LossChannel::kraus(FockDim d) const {
  std::vector<FockOperator> ops;
  ops.reserve(d.dim);
  for (int k = 0; k < d.dim; ++k) {
    FockOperator a = FockOperator::Zero(d.dim, d.dim);
    for (int n = k; n < d.dim; ++n) a(n - k, n) = loss_amp(n, k, gamma_);
    ops.push_back(std::move(a));
  }
  return ops;
}

DensityMatrix apply_loss(const DensityMatrix& rho, const LossChannel& ch) {
  return ch.apply(rho);
}

DensityMatrix prepare_squeezed(const SqueezeParams& sp, FockDim d) {
  PureState psi = squeezed_vacuum(db_to_r(sp.v0_db), d);
  return LossChannel(sp.gamma_s).apply(DensityMatrix::from_pure(psi));
}

DetectorModel DetectorModel::tes(double eta, int max_resolved) {
  DetectorModel det;
  det.kind = Kind::Tes;
  det.efficiency = eta;
  det.max_resolved = max_resolved;
  det.validate();
  return det;
}

DetectorModel DetectorModel::apd(double eta) {
  DetectorModel det;
  det.kind = Kind::Apd;
  det.efficiency = eta;
  det.n_apds = 1;
  det.validate();
  return det;
}

DetectorModel DetectorModel::multiplexed_apd(double eta, int n_apds) {
  DetectorModel det;
  det.kind = Kind::MultiplexedApd;
  det.efficiency = eta;
  det.n_apds = n_apds;
  det.validate();
  return det;
}

void DetectorModel::validate() const {
  if (efficiency < 0.0 || efficiency > 1.0) {
    throw std::invalid_argument("DetectorModel: efficiency must be in [0, 1]");
  }
  if (kind == Kind::Tes && max_resolved < 1) {
    throw std::invalid_argument("DetectorModel: Tes max_resolved must be >= 1");
  }
  if (kind == Kind::MultiplexedApd && n_apds < 1) {
    throw std::invalid_argument("DetectorModel: n_apds must be >= 1");
  }
}

int DetectorModel::max_outcome() const {
  switch (kind) {
    case Kind::Tes: return max_resolved;
    case Kind::Apd: return 1;
    case Kind::MultiplexedApd: return n_apds;
  }
  return 0;
}

double DetectorModel::response(int k_photons, int outcome) const {
  const double eta = efficiency;
  if (kind == Kind::Tes) {
    // Binomial thinning: each photon registers with probability eta.
    if (outcome > k_photons) return 0.0;
    return std::exp(math::log_factorial(k_photons) - math::log_factorial(outcome) -
                    math::log_factorial(k_photons - outcome)) *
           std::pow(eta, outcome) * std::pow(1.0 - eta, k_photons - outcome);
  }
  // m on/off detectors behind a balanced splitter; a photon registers in a
  // given detector with probability eta/m. Inclusion-exclusion over which of
  // the `outcome` clicking detectors actually stayed silent:
  //   P(c of m click | k) = C(m,c) sum_j (-1)^j C(c,j) (1 - eta (m-c+j)/m)^k
  const int m = (kind == Kind::Apd) ? 1 : n_apds;
  const int c = outcome;
  if (c < 0 || c > m) return 0.0;
  double cm = std::exp(math::log_factorial(m) - math::log_factorial(c) -
                       math::log_factorial(m - c));
  double sum = 0.0;
  for (int j = 0; j <= c; ++j) {
    double cj = std::exp(math::log_factorial(c) - math::log_factorial(j) -
                         math::log_factorial(c - j));
    double base = 1.0 - eta * double(m - c + j) / double(m);
    sum += ((j % 2 == 0) ? 1.0 : -1.0) * cj * std::pow(base, k_photons);
  }
  return cm * sum;
}

FockOperator detector_povm(const DetectorModel& det, int outcome_n, FockDim d) {
  det.validate();
  if (outcome_n < 0 || outcome_n > det.max_outcome()) {
    throw std::invalid_argument("detector_povm: outcome out of range for detector");
  }
  FockOperator pi = FockOperator::Zero(d.dim, d.dim);
  for (int k = 0; k < d.dim; ++k) pi(k, k) = det.response(k, outcome_n);
  return pi;
}

std::vector<FockOperator> detector_effects(const DetectorModel& det, FockDim d) {
  std::vector<FockOperator> effects;
  for (int n = 0; n <= det.max_outcome(); ++n) {
    effects.push_back(detector_povm(det, n, d));
  }
  if (det.kind == DetectorModel::Kind::Tes) {
    // Overflow pools every count above max_resolved.
    FockOperator rest = FockOperator::Identity(d.dim, d.dim);
    for (const auto& e : effects) rest -= e;
    for (int k = 0; k < d.dim; ++k) {
      if (rest(k, k).real() < 0.0) rest(k, k) = 0.0;  // roundoff
    }
    effects.push_back(std::move(rest));
  }
  return effects;
}

FockOperator subtraction_kraus(double reflectivity, int k, FockDim d) {
  if (reflectivity <= 0.0 || reflectivity >= 1.0) {
    throw std::invalid_argument("subtraction_kraus: reflectivity must be in (0, 1)");
  }
  if (k < 0) throw std::invalid_argument("subtraction_kraus: k must be >= 0");
  FockOperator b = FockOperator::Zero(d.dim, d.dim);
  for (int n = k; n < d.dim; ++n) {
    b(n - k, n) = loss_amp(n, k, reflectivity);
  }
  return b;
}

void HeraldConfig::validate() const {
  if (reflectivity_r <= 0.0 || reflectivity_r >= 1.0) {
    throw std::invalid_argument("HeraldConfig: reflectivity must be in (0, 1)");
  }
  detector.validate();
  if (n_subtract < 1) throw std::invalid_argument("HeraldConfig: n_subtract must be >= 1");
  if (n_subtract > detector.max_outcome()) {
    throw std::invalid_argument("HeraldConfig: n_subtract exceeds detector outcome range");
  }
  if (modal_purity_xi < 0.0 || modal_purity_xi > 1.0) {
    throw std::invalid_argument("HeraldConfig: modal purity must be in [0, 1]");
  }
}

HeraldResult herald_subtract(const DensityMatrix& rho, const HeraldConfig& hc) {
  hc.validate();
  const int d = rho.dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    double w = hc.detector.response(k, hc.n_subtract);
    if (w <= 0.0) continue;
    FockOperator b = subtraction_kraus(hc.reflectivity_r, k, FockDim(d));
    out.noalias() += w * (b * rho.matrix() * b.adjoint());
  }
  double p = out.trace().real();
  if (!(p > 1e-12)) {
    throw std::runtime_error("herald_subtract: herald probability vanishes (" +
                             std::to_string(p) + ")");
  }
  return HeraldResult{DensityMatrix(out / p), p};
}

std::vector<double> herald_outcome_probs(const DensityMatrix& rho, double reflectivity,
                                         const DetectorModel& det) {
  const int d = rho.dim();
  // P(k photons reflected) = tr(B_k rho B_k^dag), then mix with the response.
  std::vector<double> pk(d, 0.0);
  for (int k = 0; k < d; ++k) {
    FockOperator b = subtraction_kraus(reflectivity, k, FockDim(d));
    pk[k] = (b * rho.matrix() * b.adjoint()).trace().real();
  }
  std::vector<double> probs(det.max_outcome() + 1 +
                                (det.kind == DetectorModel::Kind::Tes ? 1 : 0),
                            0.0);
  for (int k = 0; k < d; ++k) {
    double covered = 0.0;
    for (int n = 0; n <= det.max_outcome(); ++n) {
      double w = det.response(k, n);
      probs[n] += w * pk[k];
      covered += w;
    }
    if (det.kind == DetectorModel::Kind::Tes) {
      probs.back() += (1.0 - covered) * pk[k];
    }
  }
  return probs;
}

DensityMatrix modal_mixture(const DensityMatrix& rho_herald,
                            const DensityMatrix& rho_background, double xi) {
  if (rho_herald.dim() != rho_background.dim()) {
    throw std::invalid_argument("modal_mixture: dimension mismatch");
  }
  if (xi < 0.0 || xi > 1.0) {
    throw std::invalid_argument("modal_mixture: xi must be in [0, 1]");
  }
  return DensityMatrix(xi * rho_herald.matrix() + (1.0 - xi) * rho_background.matrix());
}

}  // namespace catsim
