#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "catsim/fock.hpp"
#include "catsim/homodyne.hpp"
#include "catsim/optics.hpp"
#include "catsim/phase_space.hpp"
#include "catsim/tomo.hpp"

namespace catsim {

/// Everything one run needs: source, heralding, measurement chain,
/// reconstruction settings, bootstrap size, and the seed.
struct ExperimentConfig {
  std::string label;
  int dim = 30;
  SqueezeParams squeeze;
  std::optional<HeraldConfig> herald;
  double gamma_h = 0.15;
  PhaseSchedule schedule;
  int n_samples = 100000;
  int mle_max_iters = 2000;
  double mle_stop_delta = 1e-9;
  double mle_dilution = 1.0;
  int bootstrap_n = 0;
  std::uint64_t seed = 1;

  void validate() const;
  MleConfig mle_config() const;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Built-in configurations reproducing the reference experiments:
/// "one-photon-apd", "two-photon-apd", "two-photon-tes", "three-photon-tes",
/// plus "vacuum" (no squeezing, no herald).
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct ForwardResult {
  DensityMatrix state;
  double herald_prob;       // 1 when no herald stage is configured
  double discarded_tail;    // truncation weight dropped by the source state
};

/// Source preparation, heralded subtraction, and modal mixture.
ForwardResult forward_model(const ExperimentConfig& config);

struct ReconstructionReport {
  std::string label;
  std::string state_digest;
  WignerMin w_min;
  double mean_photon = 0.0;
  CssFit css;
  double herald_prob = 1.0;
  // diagnostics
  int mle_iterations = 0;
  std::string mle_termination;
  double ll_per_sample = 0.0;
  int floored_samples = 0;
  double discarded_tail = 0.0;

  std::string to_json() const;
};

/// Compute the report metrics for a state on the default phase-space grid.
ReconstructionReport analyze_state(const DensityMatrix& rho, const std::string& label);

struct PipelineResult {
  ForwardResult forward;
  QuadratureDataset dataset;
  DensityMatrix reconstructed;
  ReconstructionReport report;
  std::optional<BootstrapReport> bootstrap_report;
};

/// Full chain: forward model -> synthetic homodyne data -> MLE -> analysis
/// (-> bootstrap when bootstrap_n > 0). Writes config echo, dataset, states,
/// report, and the Wigner grid into out_dir when given.
PipelineResult run_pipeline(const ExperimentConfig& config,
                            const std::optional<std::filesystem::path>& out_dir);

struct Table1Check {
  std::string metric;
  double reference = 0.0;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Table1Row {
  std::string name;
  std::vector<Table1Check> checks;
  // Bootstrap band checks (three-photon row only).
  std::vector<Table1Check> band_checks;
  double herald_prob = 0.0;
};

struct Table1Result {
  std::vector<Table1Row> rows;
  bool all_pass = false;
  std::string to_json() const;
};

/// Run the four experiment presets end to end and compare the reconstruction
/// figures of merit against the reference experimental values.
/// resamples_override forces the bootstrap size for the three-photon row
/// (<0 keeps the preset value; 0 skips the band checks).
Table1Result reproduce_table1(const std::optional<std::filesystem::path>& out_dir,
                              int resamples_override = -1);

/// CSV rows "q,p,W" with 9 significant digits; header lines carry the grid
/// spec and the state digest. Round-trips bit-exactly.
void export_wigner_grid(const DensityMatrix& rho, const PhaseSpaceGrid& grid,
                        const std::filesystem::path& path);
Eigen::MatrixXd read_wigner_grid(const std::filesystem::path& path, PhaseSpaceGrid* grid_out);

void write_state(const DensityMatrix& rho, const std::filesystem::path& path);
DensityMatrix read_state(const std::filesystem::path& path);

/// FNV-1a over the canonical 17-significant-digit serialization.
std::string state_digest(const DensityMatrix& rho);

std::string bootstrap_to_json(const BootstrapReport& report);

}  // namespace catsim
