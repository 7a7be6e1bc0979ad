#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "catsim/fock.hpp"
#include "catsim/homodyne.hpp"
#include "catsim/phase_space.hpp"

namespace catsim {

/// Maximum-likelihood reconstruction settings. gamma_h is the loss of the
/// monolithic quadrature measurement; the POVM absorbs it so the estimate
/// refers to the state before the measurement chain.
struct MleConfig {
  FockDim dim{30};
  double gamma_h = 0.15;
  int max_iters = 2000;
  double stop_delta = 1e-9;  // per-sample log-likelihood gain threshold
  double dilution = 1.0;     // initial step mixing; backtracked when needed

  void validate() const;
};

struct MleDiagnostics {
  int iterations = 0;
  std::string termination;  // "converged" | "max_iters" | "stalled"
  double ll_per_sample = 0.0;
  int floored_samples = 0;  // max per-iteration count of probability-floored samples
  int backtracks = 0;
  std::vector<double> ll_trajectory;  // accepted log-likelihoods, non-decreasing
};

struct MleResult {
  DensityMatrix state;
  MleDiagnostics diagnostics;
};

/// Lossy quadrature POVM element (density form, per unit x):
/// Pi(x, theta) = Lambda_gamma^dag(|x_theta><x_theta|).
FockOperator povm_element(double theta, double x, const MleConfig& cfg);

/// Iterative R rho R maximum-likelihood estimate with dilution and
/// backtracking; the accepted log-likelihood sequence is non-decreasing.
MleResult mle_reconstruct(const QuadratureDataset& data, const MleConfig& cfg);

/// sum_j ln tr(rho Pi_j); -infinity when any sample has zero probability.
double loglikelihood(const DensityMatrix& rho, const QuadratureDataset& data,
                     const MleConfig& cfg);

struct PercentileTriple {
  double p16 = 0.0;
  double point = 0.0;
  double p84 = 0.0;
};

struct BootstrapReport {
  int resamples = 0;
  int excluded = 0;  // resamples that hit max_iters without converging
  PercentileTriple fidelity;
  PercentileTriple alpha;
  PercentileTriple mean_photon;
  PercentileTriple w_min;
  // Raw per-resample metric values (converged resamples only, in resample order).
  std::vector<double> fidelity_samples;
  std::vector<double> alpha_samples;
  std::vector<double> mean_photon_samples;
  std::vector<double> w_min_samples;
  std::vector<double> purity_samples;
};

/// Parametric bootstrap: draw synthetic datasets of the template's size and
/// phase sequence from the point estimate (through gamma_h), re-estimate,
/// and report 16th/84th percentiles of the figures of merit. Deterministic
/// for a fixed seed; resamples run independently in parallel. W_min of each
/// resample is taken on metric_grid (defaults to a 101-point grid over the
/// truncation-valid span).
BootstrapReport bootstrap(const DensityMatrix& point_estimate,
                          const QuadratureDataset& data_template, int n_resamples,
                          const MleConfig& cfg, std::uint64_t seed,
                          std::optional<PhaseSpaceGrid> metric_grid = std::nullopt);

/// Linear-interpolation percentile of a sorted copy of v.
double percentile(std::vector<double> v, double pct);

}  // namespace catsim
