#include "catsim/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "catsim/math.hpp"
#include "catsim/optics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catsim {

namespace {

constexpr double kProbFloor = 1e-300;

/// phi_j column vectors: (phi_j)_m = e^{i m theta_j} psi_m(x_j).
Eigen::MatrixXcd build_phi(const QuadratureDataset& data, int dim) {
  Eigen::MatrixXcd phi(dim, data.size());
  std::vector<double> psi(dim);
  for (int j = 0; j < data.size(); ++j) {
    math::oscillator_psi(data.x[j], psi);
    double th = data.theta[j];
    for (int m = 0; m < dim; ++m) {
      phi(m, j) = std::polar(psi[m], m * th);
    }
  }
  return phi;
}

struct PassResult {
  double ll = 0.0;
  int floored = 0;
  bool zero_prob = false;
};

/// Per-sample probabilities p_j = phi_j^dag rho_lossy phi_j, log-likelihood,
/// and optionally the accumulator S = sum_j phi_j phi_j^dag / p_j.
PassResult likelihood_pass(const Eigen::MatrixXcd& rho_lossy, const Eigen::MatrixXcd& phi,
                           Eigen::MatrixXcd* s_out) {
  const int n = static_cast<int>(phi.cols());
  constexpr int kBlock = 4096;
  PassResult res;
  if (s_out) s_out->setZero(rho_lossy.rows(), rho_lossy.cols());
  Eigen::VectorXd pinv(kBlock);
  for (int j0 = 0; j0 < n; j0 += kBlock) {
    int len = std::min(kBlock, n - j0);
    auto block = phi.middleCols(j0, len);
    Eigen::MatrixXcd prod = rho_lossy * block;
    for (int c = 0; c < len; ++c) {
      double p = block.col(c).dot(prod.col(c)).real();
      if (p <= 0.0) {
        res.zero_prob = true;
        p = kProbFloor;
        ++res.floored;
      } else if (p < kProbFloor) {
        p = kProbFloor;
        ++res.floored;
      }
      res.ll += std::log(p);
      pinv(c) = 1.0 / p;
    }
    if (s_out) {
      s_out->noalias() +=
          (block * pinv.head(len).asDiagonal()) * block.adjoint();
    }
  }
  return res;
}

Eigen::MatrixXcd normalized_sandwich(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& rho) {
  Eigen::MatrixXcd cand = m * rho * m;
  cand = 0.5 * (cand + cand.adjoint()).eval();
  cand /= cand.trace().real();
  return cand;
}

}  // namespace

void MleConfig::validate() const {
  if (gamma_h < 0.0 || gamma_h >= 1.0) {
    throw std::invalid_argument("MleConfig: gamma_h must be in [0, 1)");
  }
  if (max_iters < 1) throw std::invalid_argument("MleConfig: max_iters must be >= 1");
  if (!(stop_delta > 0.0)) throw std::invalid_argument("MleConfig: stop_delta must be > 0");
  if (!(dilution > 0.0) || dilution > 1.0) {
    throw std::invalid_argument("MleConfig: dilution must be in (0, 1]");
  }
}

FockOperator povm_element(double theta, double x, const MleConfig& cfg) {
  cfg.validate();
  const int d = cfg.dim.dim;
  std::vector<double> psi(d);
  math::oscillator_psi(x, psi);
  Eigen::VectorXcd phi(d);
  for (int m = 0; m < d; ++m) phi(m) = std::polar(psi[m], m * theta);
  Eigen::MatrixXcd projector = phi * phi.adjoint();
  if (cfg.gamma_h == 0.0) return projector;
  return LossChannel(cfg.gamma_h).apply_adjoint(projector);
}

double loglikelihood(const DensityMatrix& rho, const QuadratureDataset& data,
                     const MleConfig& cfg) {
  cfg.validate();
  data.validate();
  if (rho.dim() != cfg.dim.dim) {
    throw std::invalid_argument("loglikelihood: state dim does not match config");
  }
  Eigen::MatrixXcd phi = build_phi(data, cfg.dim.dim);
  LossChannel loss(cfg.gamma_h);
  Eigen::MatrixXcd lossy = loss.apply_raw(rho.matrix());
  PassResult res = likelihood_pass(lossy, phi, nullptr);
  if (res.zero_prob) return -std::numeric_limits<double>::infinity();
  return res.ll;
}

MleResult mle_reconstruct(const QuadratureDataset& data, const MleConfig& cfg) {
  cfg.validate();
  data.validate();
  const int d = cfg.dim.dim;
  const int n = data.size();
  const LossChannel loss(cfg.gamma_h);
  const Eigen::MatrixXcd phi = build_phi(data, d);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(d, d) / double(d);
  Eigen::MatrixXcd s(d, d);
  PassResult cur = likelihood_pass(loss.apply_raw(rho), phi, &s);

  MleDiagnostics diag;
  diag.termination = "max_iters";
  diag.floored_samples = cur.floored;
  diag.ll_trajectory.push_back(cur.ll);
  int small_gain_streak = 0;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    diag.iterations = iter;
    Eigen::MatrixXcd r_op = loss.apply_adjoint(s) / double(n);

    double eps = cfg.dilution;
    bool accepted = false;
    Eigen::MatrixXcd cand, cand_s(d, d);
    PassResult next;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXcd mix = (1.0 - eps) * Eigen::MatrixXcd::Identity(d, d) + eps * r_op;
      cand = normalized_sandwich(mix, rho);
      next = likelihood_pass(loss.apply_raw(cand), phi, &cand_s);
      if (next.ll >= cur.ll) {
        accepted = true;
        break;
      }
      ++diag.backtracks;
      eps *= 0.5;
      if (eps < 1e-8) break;
    }
    if (!accepted) {
      diag.termination = "stalled";
      break;
    }

#ifndef NDEBUG
    {
      double herm = (cand - cand.adjoint()).cwiseAbs().maxCoeff();
      double tr = cand.trace().real();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cand, Eigen::EigenvaluesOnly);
      if (herm > 1e-10 || std::abs(tr - 1.0) > 1e-8 ||
          es.eigenvalues().minCoeff() < -1e-8) {
        throw std::logic_error("mle_reconstruct: iterate violates state invariants");
      }
    }
#endif

    double gain = (next.ll - cur.ll) / double(n);
    rho.swap(cand);
    s.swap(cand_s);
    cur = next;
    diag.floored_samples = std::max(diag.floored_samples, next.floored);
    diag.ll_trajectory.push_back(cur.ll);

    if (gain < cfg.stop_delta) {
      if (++small_gain_streak >= 10) {
        diag.termination = "converged";
        break;
      }
    } else {
      small_gain_streak = 0;
    }
  }

  diag.ll_per_sample = cur.ll / double(n);
  return MleResult{DensityMatrix(rho), diag};
}

double percentile(std::vector<double> v, double pct) {
  if (v.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(v.begin(), v.end());
  double rank = pct / 100.0 * (static_cast<double>(v.size()) - 1.0);
  size_t lo = static_cast<size_t>(std::floor(rank));
  size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = rank - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

BootstrapReport bootstrap(const DensityMatrix& point_estimate,
                          const QuadratureDataset& data_template, int n_resamples,
                          const MleConfig& cfg, std::uint64_t seed,
                          std::optional<PhaseSpaceGrid> metric_grid_opt) {
  cfg.validate();
  data_template.validate();
  if (n_resamples < 2) throw std::invalid_argument("bootstrap: need at least 2 resamples");
  const PhaseSpaceGrid metric_grid =
      metric_grid_opt ? *metric_grid_opt : default_grid_for_dim(cfg.dim.dim, 101);
  metric_grid.validate();

  const int n = data_template.size();
  BootstrapReport report;
  report.resamples = n_resamples;

  CssFit point_fit = nearest_css(point_estimate);
  report.fidelity.point = point_fit.fidelity;
  report.alpha.point = std::abs(point_fit.alpha);
  report.mean_photon.point = mean_photon(point_estimate);
  report.w_min.point = wigner_min(point_estimate, metric_grid).w_min;

  // Shared inverse-CDF tables: every resample reuses the template's phase
  // sequence, so one sampler per distinct phase serves all of them.
  DensityMatrix lossy = (data_template.gamma_h > 0.0)
                            ? LossChannel(data_template.gamma_h).apply(point_estimate)
                            : point_estimate;
  std::vector<double> sorted_phases(data_template.theta);
  std::sort(sorted_phases.begin(), sorted_phases.end());
  sorted_phases.erase(std::unique(sorted_phases.begin(), sorted_phases.end()),
                      sorted_phases.end());
  std::vector<QuadratureSampler> samplers;
  samplers.reserve(sorted_phases.size());
  for (double th : sorted_phases) samplers.emplace_back(lossy, th);
  std::vector<int> phase_index(n);
  for (int j = 0; j < n; ++j) {
    phase_index[j] = static_cast<int>(
        std::lower_bound(sorted_phases.begin(), sorted_phases.end(), data_template.theta[j]) -
        sorted_phases.begin());
  }

  struct Row {
    double f = 0.0, a = 0.0, nbar = 0.0, wmin = 0.0, pur = 0.0;
    bool converged = false;
  };
  std::vector<Row> rows(n_resamples);
  std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < n_resamples; ++r) {
    try {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r) + 1));
      QuadratureDataset synth;
      synth.gamma_h = data_template.gamma_h;
      synth.seed = derive_seed(seed, static_cast<std::uint64_t>(r) + 1);
      synth.source_label = data_template.source_label + "/resample";
      synth.theta = data_template.theta;
      synth.x.resize(n);
      for (int j = 0; j < n; ++j) synth.x[j] = samplers[phase_index[j]].sample(rng.uniform());

      MleResult est = mle_reconstruct(synth, cfg);
      Row& row = rows[r];
      row.converged = est.diagnostics.termination != "max_iters";
      CssFit fit = nearest_css(est.state);
      row.f = fit.fidelity;
      row.a = std::abs(fit.alpha);
      row.nbar = mean_photon(est.state);
      row.wmin = wigner_min(est.state, metric_grid).w_min;
      row.pur = purity(est.state);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (const Row& row : rows) {
    if (!row.converged) {
      ++report.excluded;
      continue;
    }
    report.fidelity_samples.push_back(row.f);
    report.alpha_samples.push_back(row.a);
    report.mean_photon_samples.push_back(row.nbar);
    report.w_min_samples.push_back(row.wmin);
    report.purity_samples.push_back(row.pur);
  }
  if (report.fidelity_samples.size() < 2) {
    throw std::runtime_error("bootstrap: fewer than 2 converged resamples");
  }
  report.fidelity.p16 = percentile(report.fidelity_samples, 16.0);
  report.fidelity.p84 = percentile(report.fidelity_samples, 84.0);
  report.alpha.p16 = percentile(report.alpha_samples, 16.0);
  report.alpha.p84 = percentile(report.alpha_samples, 84.0);
  report.mean_photon.p16 = percentile(report.mean_photon_samples, 16.0);
  report.mean_photon.p84 = percentile(report.mean_photon_samples, 84.0);
  report.w_min.p16 = percentile(report.w_min_samples, 16.0);
  report.w_min.p84 = percentile(report.w_min_samples, 84.0);
  return report;
}

}  // namespace catsim
