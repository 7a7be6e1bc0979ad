#pragma once

#include <vector>

#include "catsim/fock.hpp"

namespace catsim {

/// Convert a relative minimum quadrature variance in dB (<= 0) to the
/// squeezing parameter r, under V_min = (1/2) e^{-2r}.
double db_to_r(double v0_db);

/// Beamsplitter-to-vacuum loss channel: fraction gamma of photons lost.
/// Kraus elements A_k |n> = sqrt(C(n,k) (1-gamma)^{n-k} gamma^k) |n-k>.
class LossChannel {
 public:
  explicit LossChannel(double gamma);

  double gamma() const { return gamma_; }

  DensityMatrix apply(const DensityMatrix& rho) const;
  std::vector<FockOperator> kraus(FockDim d) const;

  /// Schroedinger picture on a raw matrix; trace-preserving.
  Eigen::MatrixXcd apply_raw(const Eigen::MatrixXcd& rho) const;
  /// Heisenberg picture (adjoint map) on an observable / POVM effect.
  Eigen::MatrixXcd apply_adjoint(const Eigen::MatrixXcd& x) const;

 private:
  double gamma_;
};

DensityMatrix apply_loss(const DensityMatrix& rho, const LossChannel& ch);

/// Pure squeezed vacuum (from v0_db) followed by the source loss gamma_s.
DensityMatrix prepare_squeezed(const SqueezeParams& sp, FockDim d);

/// Photon counter/click detector on the subtraction arm.
///  - Tes: photon-number resolving with binomial efficiency and an overflow
///    outcome pooling counts above max_resolved.
///  - Apd: single on/off detector; outcomes are 0 or 1 clicks.
///  - MultiplexedApd: n_apds on/off detectors behind a balanced splitter;
///    outcomes are 0..n_apds clicks.
struct DetectorModel {
  enum class Kind { Tes, Apd, MultiplexedApd };

  Kind kind = Kind::Tes;
  double efficiency = 0.85;
  int max_resolved = 10;  // Tes only
  int n_apds = 1;         // MultiplexedApd only

  static DetectorModel tes(double eta, int max_resolved = 10);
  static DetectorModel apd(double eta);
  static DetectorModel multiplexed_apd(double eta, int n_apds);

  /// Largest exact outcome index (photon count for Tes, clicks for APDs).
  int max_outcome() const;
  /// P(outcome | k photons arrive at the detector).
  double response(int k_photons, int outcome) const;

  void validate() const;
};

/// POVM effect for an exact outcome (diagonal in photon number). Requesting
/// outcome_n above max_outcome() is an error; for the Tes the overflow
/// effect is available through detector_effects().
FockOperator detector_povm(const DetectorModel& det, int outcome_n, FockDim d);

/// All effects, resolving the identity. For the Tes the last entry is the
/// overflow outcome (all counts above max_resolved pooled).
std::vector<FockOperator> detector_effects(const DetectorModel& det, FockDim d);

/// Conditional beamsplitter Kraus operator for exactly k photons into the
/// reflected port: B_k = (R/(1-R))^{k/2} a^k (1-R)^{n/2} / sqrt(k!).
FockOperator subtraction_kraus(double reflectivity, int k, FockDim d);

struct HeraldConfig {
  double reflectivity_r = 0.05;
  DetectorModel detector;
  int n_subtract = 1;
  double modal_purity_xi = 1.0;

  void validate() const;
};

struct HeraldResult {
  DensityMatrix state;
  double herald_prob;
};

/// Condition the transmitted beam on the detector registering the target
/// outcome: rho' ~ sum_k P(outcome | k reflected) B_k rho B_k^dag.
/// Throws if the herald probability is below 1e-12.
HeraldResult herald_subtract(const DensityMatrix& rho, const HeraldConfig& hc);

/// Probability of each detector outcome (including Tes overflow as the last
/// entry); sums to 1.
std::vector<double> herald_outcome_probs(const DensityMatrix& rho, double reflectivity,
                                         const DetectorModel& det);

/// xi * rho_herald + (1 - xi) * rho_background.
DensityMatrix modal_mixture(const DensityMatrix& rho_herald,
                            const DensityMatrix& rho_background, double xi);

}  // namespace catsim
