#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "catsim/fock.hpp"
#include "catsim/rng.hpp"

namespace catsim {

/// Local-oscillator phase schedule over a dataset.
///  - Sawtooth: the phase sweeps [0, pi) linearly, `cycles` times across the
///    dataset, quantized to n_phases distinct values per sweep.
///  - UniformRandom: each sample draws an independent phase in [0, 2pi).
struct PhaseSchedule {
  enum class Kind { UniformRandom, Sawtooth };

  Kind kind = Kind::Sawtooth;
  int n_phases = 100;
  int cycles = 1;

  static PhaseSchedule sawtooth(int n_phases, int cycles);
  static PhaseSchedule uniform_random();

  void validate() const;
  /// Phase for every sample index. Consumes rng only for UniformRandom.
  std::vector<double> phases(int n_samples, Rng& rng) const;
};

/// Homodyne samples: one (theta, x) record per measurement, plus the loss of
/// the measurement chain and the generation seed.
struct QuadratureDataset {
  std::vector<double> theta;
  std::vector<double> x;
  double gamma_h = 0.0;
  std::uint64_t seed = 0;
  std::string source_label;

  int size() const { return static_cast<int>(theta.size()); }
  void validate() const;
};

/// Tabulated inverse-CDF sampler for pr(x | theta) of one state at one
/// phase. The table is built on an adaptively refined grid over
/// [-sqrt(2 dim), sqrt(2 dim)]; probability mass falling outside that range
/// is recorded as truncated_tail_mass.
class QuadratureSampler {
 public:
  /// Distribution of the given (already lossy, if applicable) state.
  QuadratureSampler(const DensityMatrix& rho, double theta);
  /// Distribution |sum_m c_m e^{i m theta} psi_m(x)|^2 of one pure component.
  QuadratureSampler(const Eigen::VectorXcd& coeffs, double theta);

  /// Inverse CDF at u in [0, 1).
  double sample(double u) const;
  double cdf(double x) const;
  double truncated_tail_mass() const { return tail_; }

 private:
  template <typename Pdf>
  void build(const Pdf& pdf, int dim);

  std::vector<double> xs_;    // panel endpoints
  std::vector<double> pdfs_;  // pdf at endpoints
  std::vector<double> cums_;  // normalized cumulative mass at endpoints
  double total_ = 0.0;
  double tail_ = 0.0;
};

/// Draw n_samples quadratures from rho seen through a measurement loss
/// gamma_h, phases from the schedule. Deterministic for fixed inputs and
/// seed; byte-identical datasets on repeated runs.
QuadratureDataset sample_quadratures(const DensityMatrix& rho, double gamma_h,
                                     const PhaseSchedule& schedule, int n_samples,
                                     std::uint64_t seed, std::string source_label);

/// Text format: one header line
///   catsim-quad-v1,<gamma_h>,<seed>,<label>,<count>
/// then one "theta,x" record per line, decimal text with 9 significant
/// digits. Round-trips bit-exactly.
void write_dataset(const QuadratureDataset& data, const std::filesystem::path& path);
QuadratureDataset read_dataset(const std::filesystem::path& path);

}  // namespace catsim
