// Command-line front end: forward simulation, homodyne sampling, MLE
// reconstruction, analysis, bootstrap, the full pipeline, and the reference
// comparison table.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "catsim/pipeline.hpp"

namespace {

using namespace catsim;

struct CommonOpts {
  std::string preset_name;
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int resamples = -1;
  int dim = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
  if (needs_config) {
    auto* p = cmd->add_option("--preset", opts.preset_name, "built-in configuration name");
    auto* c = cmd->add_option("--config", opts.config_path, "JSON configuration file");
    p->excludes(c);
  }
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override the configuration seed");
  cmd->add_option("--resamples", opts.resamples, "override the bootstrap resample count");
  cmd->add_option("--dim", opts.dim, "override the Fock-space dimension");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
  ExperimentConfig cfg;
  if (!opts.preset_name.empty()) {
    cfg = preset(opts.preset_name);
  } else if (!opts.config_path.empty()) {
    cfg = ExperimentConfig::load(opts.config_path);
  } else {
    throw std::runtime_error("either --preset or --config is required");
  }
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.resamples >= 0) cfg.bootstrap_n = opts.resamples;
  if (opts.dim > 0) cfg.dim = opts.dim;
  cfg.validate();
  return cfg;
}

std::optional<std::filesystem::path> out_path(const CommonOpts& opts) {
  if (opts.out_dir.empty()) return std::nullopt;
  std::filesystem::create_directories(opts.out_dir);
  return std::filesystem::path(opts.out_dir);
}

void print_report(const ReconstructionReport& rep) {
  std::printf("%-18s W_min=%+.4f at (%.3f, %.3f)  <n>=%.4f  F=%.4f  |alpha|=%.4f (%s)%s\n",
              rep.label.c_str(), rep.w_min.w_min, rep.w_min.q, rep.w_min.p, rep.mean_photon,
              rep.css.fidelity, std::abs(rep.css.alpha), parity_name(rep.css.parity),
              rep.css.degenerate ? " [degenerate]" : "");
  std::printf("%-18s herald_p=%.4e  mle: %d iters (%s), ll/N=%.6f\n", "", rep.herald_prob,
              rep.mle_iterations, rep.mle_termination.c_str(), rep.ll_per_sample);
}

int cmd_forward(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve_config(opts);
  ForwardResult fwd = forward_model(cfg);
  ReconstructionReport rep = analyze_state(fwd.state, cfg.label + "/forward");
  rep.herald_prob = fwd.herald_prob;
  rep.discarded_tail = fwd.discarded_tail;
  print_report(rep);
  if (auto dir = out_path(opts)) {
    write_state(fwd.state, *dir / "forward_state.json");
    std::ofstream(*dir / "forward_report.json") << rep.to_json();
    export_wigner_grid(fwd.state, default_grid_for_dim(fwd.state.dim()), *dir / "forward_wigner.csv");
  }
  return 0;
}

int cmd_sample(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve_config(opts);
  ForwardResult fwd = forward_model(cfg);
  QuadratureDataset data = sample_quadratures(fwd.state, cfg.gamma_h, cfg.schedule,
                                              cfg.n_samples, cfg.seed, cfg.label);
  auto dir = out_path(opts);
  if (!dir) throw std::runtime_error("sample: --out is required");
  write_dataset(data, *dir / "dataset.csv");
  std::printf("%s: wrote %d samples (gamma_h=%.3f) to %s\n", cfg.label.c_str(), data.size(),
              data.gamma_h, (*dir / "dataset.csv").c_str());
  return 0;
}

int cmd_reconstruct(const CommonOpts& opts, const std::string& data_path) {
  ExperimentConfig cfg = resolve_config(opts);
  QuadratureDataset data = read_dataset(data_path);
  MleResult est = mle_reconstruct(data, cfg.mle_config());
  ReconstructionReport rep = analyze_state(est.state, cfg.label);
  rep.mle_iterations = est.diagnostics.iterations;
  rep.mle_termination = est.diagnostics.termination;
  rep.ll_per_sample = est.diagnostics.ll_per_sample;
  rep.floored_samples = est.diagnostics.floored_samples;
  print_report(rep);
  if (auto dir = out_path(opts)) {
    write_state(est.state, *dir / "state.json");
    std::ofstream(*dir / "report.json") << rep.to_json();
  }
  return 0;
}

int cmd_analyze(const CommonOpts& opts, const std::string& state_path) {
  DensityMatrix rho = read_state(state_path);
  ReconstructionReport rep = analyze_state(rho, state_path);
  print_report(rep);
  if (auto dir = out_path(opts)) {
    std::ofstream(*dir / "report.json") << rep.to_json();
    export_wigner_grid(rho, default_grid_for_dim(rho.dim()), *dir / "wigner.csv");
  }
  return 0;
}

int cmd_bootstrap(const CommonOpts& opts, const std::string& state_path,
                  const std::string& data_path) {
  ExperimentConfig cfg = resolve_config(opts);
  DensityMatrix point = read_state(state_path);
  QuadratureDataset data = read_dataset(data_path);
  int n = (opts.resamples >= 0) ? opts.resamples : cfg.bootstrap_n;
  BootstrapReport rep = bootstrap(point, data, n, cfg.mle_config(), derive_seed(cfg.seed, 2));
  std::printf("bootstrap (%d resamples, %d excluded):\n", rep.resamples, rep.excluded);
  auto line = [](const char* name, const PercentileTriple& t) {
    std::printf("  %-12s %.4f  [16th %.4f, 84th %.4f]\n", name, t.point, t.p16, t.p84);
  };
  line("F", rep.fidelity);
  line("|alpha|", rep.alpha);
  line("<n>", rep.mean_photon);
  line("W_min", rep.w_min);
  if (auto dir = out_path(opts)) {
    std::ofstream(*dir / "bootstrap.json") << bootstrap_to_json(rep);
  }
  return 0;
}

int cmd_pipeline(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve_config(opts);
  PipelineResult run = run_pipeline(cfg, out_path(opts));
  print_report(run.report);
  if (run.bootstrap_report) {
    const BootstrapReport& b = *run.bootstrap_report;
    std::printf("bootstrap (%d resamples): F in [%.4f, %.4f], |alpha| in [%.4f, %.4f]\n",
                b.resamples, b.fidelity.p16, b.fidelity.p84, b.alpha.p16, b.alpha.p84);
  }
  return 0;
}

int cmd_table1(const CommonOpts& opts) {
  Table1Result result = reproduce_table1(out_path(opts), opts.resamples);
  for (const Table1Row& row : result.rows) {
    std::printf("%s (herald_p=%.3e)\n", row.name.c_str(), row.herald_prob);
    for (const Table1Check& c : row.checks) {
      std::printf("  %-12s ref %+8.3f  model %+8.3f  |d|=%.3f  tol %.3f  %s\n", c.metric.c_str(),
                  c.reference, c.value, std::abs(c.value - c.reference), c.tolerance,
                  c.pass ? "pass" : "FAIL");
    }
    for (const Table1Check& c : row.band_checks) {
      std::printf("  %-12s ref %+8.3f  %s\n", c.metric.c_str(), c.reference,
                  c.pass ? "inside band (pass)" : "outside band (FAIL)");
    }
  }
  std::printf("table1: %s\n", result.all_pass ? "all checks pass" : "some checks FAILED");
  return result.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catsim: photon-subtracted squeezed-vacuum simulation and tomography"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string data_path, state_path;

  auto* fwd = app.add_subcommand("forward", "compute the modeled heralded state");
  add_common(fwd, opts);
  auto* smp = app.add_subcommand("sample", "generate a synthetic homodyne dataset");
  add_common(smp, opts);
  auto* rec = app.add_subcommand("reconstruct", "maximum-likelihood estimate from a dataset");
  add_common(rec, opts);
  rec->add_option("--data", data_path, "dataset file")->required();
  auto* ana = app.add_subcommand("analyze", "figures of merit for a stored state");
  add_common(ana, opts, false);
  ana->add_option("--state", state_path, "state file")->required();
  auto* boo = app.add_subcommand("bootstrap", "percentile intervals by parametric bootstrap");
  add_common(boo, opts);
  boo->add_option("--state", state_path, "point-estimate state file")->required();
  boo->add_option("--data", data_path, "template dataset file")->required();
  auto* pip = app.add_subcommand("pipeline", "forward -> sample -> reconstruct -> analyze");
  add_common(pip, opts);
  auto* tab = app.add_subcommand("table1", "compare all presets against the reference values");
  add_common(tab, opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fwd->parsed()) return cmd_forward(opts);
    if (smp->parsed()) return cmd_sample(opts);
    if (rec->parsed()) return cmd_reconstruct(opts, data_path);
    if (ana->parsed()) return cmd_analyze(opts, state_path);
    if (boo->parsed()) return cmd_bootstrap(opts, state_path, data_path);
    if (pip->parsed()) return cmd_pipeline(opts);
    if (tab->parsed()) return cmd_table1(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
