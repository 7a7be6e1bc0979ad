#include "catsim/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace catsim {

namespace {

using nlohmann::json;

std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

std::string format_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json detector_to_json(const DetectorModel& det) {
  json j;
  switch (det.kind) {
    case DetectorModel::Kind::Tes: j["kind"] = "tes"; break;
    case DetectorModel::Kind::Apd: j["kind"] = "apd"; break;
    case DetectorModel::Kind::MultiplexedApd: j["kind"] = "multiplexed_apd"; break;
  }
  j["efficiency"] = det.efficiency;
  j["max_resolved"] = det.max_resolved;
  j["n_apds"] = det.n_apds;
  return j;
}

DetectorModel detector_from_json(const json& j) {
  DetectorModel det;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "tes") {
    det.kind = DetectorModel::Kind::Tes;
  } else if (kind == "apd") {
    det.kind = DetectorModel::Kind::Apd;
  } else if (kind == "multiplexed_apd") {
    det.kind = DetectorModel::Kind::MultiplexedApd;
  } else {
    throw std::invalid_argument("unknown detector kind '" + kind + "'");
  }
  det.efficiency = j.at("efficiency").get<double>();
  det.max_resolved = j.value("max_resolved", 10);
  det.n_apds = j.value("n_apds", 1);
  det.validate();
  return det;
}

json schedule_to_json(const PhaseSchedule& s) {
  json j;
  j["kind"] = (s.kind == PhaseSchedule::Kind::Sawtooth) ? "sawtooth" : "uniform_random";
  j["n_phases"] = s.n_phases;
  j["cycles"] = s.cycles;
  return j;
}

PhaseSchedule schedule_from_json(const json& j) {
  PhaseSchedule s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "sawtooth") {
    s.kind = PhaseSchedule::Kind::Sawtooth;
    s.n_phases = j.at("n_phases").get<int>();
    s.cycles = j.at("cycles").get<int>();
  } else if (kind == "uniform_random") {
    s.kind = PhaseSchedule::Kind::UniformRandom;
  } else {
    throw std::invalid_argument("unknown schedule kind '" + kind + "'");
  }
  s.validate();
  return s;
}

struct Table1Reference {
  const char* preset_name;
  const char* row_name;
  double w_min, mean_n, fidelity, alpha;
  double tol_scale;
  bool band_checks;
};

// Reference experimental values (one-, two-, three-photon subtraction) and
// the consistency tolerances |dF| <= 0.08, |d alpha| <= 0.20, |d<n>| <= 0.35,
// |dW_min| <= 0.05; the three-photon row doubles them and additionally
// requires the reference F and |alpha| to lie in the bootstrap band.
constexpr Table1Reference kTable1[] = {
    {"one-photon-apd", "APD-1", -0.041, 1.96, 0.522, 1.32, 1.0, false},
    {"two-photon-apd", "APD-2", -0.018, 2.34, 0.523, 1.30, 1.0, false},
    {"two-photon-tes", "TES-2", -0.010, 1.89, 0.531, 1.16, 1.0, false},
    {"three-photon-tes", "TES-3", -0.116, 2.75, 0.59, 1.76, 2.0, true},
};

}  // namespace

void ExperimentConfig::validate() const {
  if (label.empty()) throw std::invalid_argument("ExperimentConfig: label must be nonempty");
  FockDim d(dim);
  SqueezeParams check_sq(squeeze.v0_db, squeeze.gamma_s);  // revalidates ranges
  (void)check_sq;
  if (herald) herald->validate();
  schedule.validate();
  if (n_samples < 1) throw std::invalid_argument("ExperimentConfig: n_samples must be >= 1");
  if (bootstrap_n < 0) throw std::invalid_argument("ExperimentConfig: bootstrap_n must be >= 0");
  mle_config().validate();
}

MleConfig ExperimentConfig::mle_config() const {
  MleConfig cfg;
  cfg.dim = FockDim(dim);
  cfg.gamma_h = gamma_h;
  cfg.max_iters = mle_max_iters;
  cfg.stop_delta = mle_stop_delta;
  cfg.dilution = mle_dilution;
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["label"] = label;
  j["dim"] = dim;
  j["squeeze"] = {{"v0_db", squeeze.v0_db}, {"gamma_s", squeeze.gamma_s}};
  if (herald) {
    j["herald"] = {{"reflectivity", herald->reflectivity_r},
                   {"n_subtract", herald->n_subtract},
                   {"modal_purity", herald->modal_purity_xi},
                   {"detector", detector_to_json(herald->detector)}};
  } else {
    j["herald"] = nullptr;
  }
  j["gamma_h"] = gamma_h;
  j["schedule"] = schedule_to_json(schedule);
  j["n_samples"] = n_samples;
  j["mle"] = {{"max_iters", mle_max_iters},
              {"stop_delta", mle_stop_delta},
              {"dilution", mle_dilution}};
  j["bootstrap_n"] = bootstrap_n;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig cfg;
  cfg.label = j.at("label").get<std::string>();
  cfg.dim = j.value("dim", 30);
  const json& sq = j.at("squeeze");
  cfg.squeeze = SqueezeParams(sq.at("v0_db").get<double>(), sq.at("gamma_s").get<double>());
  if (j.contains("herald") && !j.at("herald").is_null()) {
    const json& h = j.at("herald");
    HeraldConfig hc;
    hc.reflectivity_r = h.at("reflectivity").get<double>();
    hc.n_subtract = h.at("n_subtract").get<int>();
    hc.modal_purity_xi = h.at("modal_purity").get<double>();
    hc.detector = detector_from_json(h.at("detector"));
    cfg.herald = hc;
  }
  cfg.gamma_h = j.at("gamma_h").get<double>();
  cfg.schedule = schedule_from_json(j.at("schedule"));
  cfg.n_samples = j.at("n_samples").get<int>();
  if (j.contains("mle")) {
    const json& m = j.at("mle");
    cfg.mle_max_iters = m.value("max_iters", 2000);
    cfg.mle_stop_delta = m.value("stop_delta", 1e-9);
    cfg.mle_dilution = m.value("dilution", 1.0);
  }
  cfg.bootstrap_n = j.value("bootstrap_n", 0);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.label = name;
  cfg.dim = 30;
  cfg.squeeze = SqueezeParams(-6.8, 0.36);  // -6.8 dB source, 36 % source loss
  cfg.gamma_h = 0.15;                       // measurement-chain loss
  cfg.schedule = PhaseSchedule::sawtooth(100, 1000);
  cfg.n_samples = 100000;
  cfg.bootstrap_n = 100;

  if (name == "one-photon-apd") {
    HeraldConfig hc;
    hc.reflectivity_r = 0.025;
    hc.detector = DetectorModel::apd(0.50);
    hc.n_subtract = 1;
    hc.modal_purity_xi = 0.91;
    cfg.herald = hc;
    cfg.seed = 101;
  } else if (name == "two-photon-apd") {
    HeraldConfig hc;
    hc.reflectivity_r = 0.05;
    hc.detector = DetectorModel::multiplexed_apd(0.50, 2);
    hc.n_subtract = 2;
    hc.modal_purity_xi = 0.85;
    cfg.herald = hc;
    cfg.seed = 202;
  } else if (name == "two-photon-tes") {
    HeraldConfig hc;
    hc.reflectivity_r = 0.05;
    hc.detector = DetectorModel::tes(0.85);
    hc.n_subtract = 2;
    hc.modal_purity_xi = 0.62;
    cfg.herald = hc;
    cfg.seed = 303;
  } else if (name == "three-photon-tes") {
    HeraldConfig hc;
    hc.reflectivity_r = 0.20;
    hc.detector = DetectorModel::tes(0.85);
    hc.n_subtract = 3;
    hc.modal_purity_xi = 0.84;
    cfg.herald = hc;
    cfg.n_samples = 1087;
    cfg.schedule = PhaseSchedule::sawtooth(91, 13);
    cfg.bootstrap_n = 1000;
    cfg.seed = 404;
  } else if (name == "vacuum") {
    cfg.squeeze = SqueezeParams(0.0, 0.0);
    cfg.dim = 16;
    cfg.n_samples = 50000;
    cfg.schedule = PhaseSchedule::sawtooth(50, 100);
    cfg.bootstrap_n = 0;
    cfg.seed = 505;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"one-photon-apd", "two-photon-apd", "two-photon-tes", "three-photon-tes", "vacuum"};
}

ForwardResult forward_model(const ExperimentConfig& config) {
  config.validate();
  const FockDim d(config.dim);
  PureState src = squeezed_vacuum(db_to_r(config.squeeze.v0_db), d);
  DensityMatrix rho0 = LossChannel(config.squeeze.gamma_s).apply(DensityMatrix::from_pure(src));
  if (!config.herald) {
    return ForwardResult{rho0, 1.0, src.discarded_tail()};
  }
  HeraldResult heralded = herald_subtract(rho0, *config.herald);
  DensityMatrix background = LossChannel(config.herald->reflectivity_r).apply(rho0);
  DensityMatrix mixed = modal_mixture(heralded.state, background, config.herald->modal_purity_xi);
  return ForwardResult{mixed, heralded.herald_prob, src.discarded_tail()};
}

ReconstructionReport analyze_state(const DensityMatrix& rho, const std::string& label) {
  ReconstructionReport rep;
  rep.label = label;
  rep.state_digest = state_digest(rho);
  rep.w_min = wigner_min(rho, default_grid_for_dim(rho.dim()));
  rep.mean_photon = catsim::mean_photon(rho);
  rep.css = nearest_css(rho);
  return rep;
}

std::string ReconstructionReport::to_json() const {
  json j;
  j["label"] = label;
  j["state_digest"] = state_digest;
  j["w_min"] = {{"value", w_min.w_min}, {"q", w_min.q}, {"p", w_min.p}};
  j["mean_photon"] = mean_photon;
  j["css_fit"] = {{"alpha_abs", std::abs(css.alpha)},
                  {"alpha_re", css.alpha.real()},
                  {"alpha_im", css.alpha.imag()},
                  {"parity", parity_name(css.parity)},
                  {"fidelity", css.fidelity},
                  {"degenerate", css.degenerate}};
  j["herald_prob"] = herald_prob;
  j["diagnostics"] = {{"mle_iterations", mle_iterations},
                      {"mle_termination", mle_termination},
                      {"ll_per_sample", ll_per_sample},
                      {"floored_samples", floored_samples},
                      {"discarded_tail", discarded_tail}};
  return j.dump(2) + "\n";
}

std::string bootstrap_to_json(const BootstrapReport& report) {
  json j;
  j["resamples"] = report.resamples;
  j["excluded"] = report.excluded;
  auto triple = [](const PercentileTriple& t) {
    return json{{"p16", t.p16}, {"point", t.point}, {"p84", t.p84}};
  };
  j["fidelity"] = triple(report.fidelity);
  j["alpha"] = triple(report.alpha);
  j["mean_photon"] = triple(report.mean_photon);
  j["w_min"] = triple(report.w_min);
  j["samples"] = {{"fidelity", report.fidelity_samples},
                  {"alpha", report.alpha_samples},
                  {"mean_photon", report.mean_photon_samples},
                  {"w_min", report.w_min_samples},
                  {"purity", report.purity_samples}};
  return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const ExperimentConfig& config,
                            const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
    }
  };

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_text(*out_dir / "config.json", config.to_json());
  }

  ForwardResult fwd = stage("forward", [&] { return forward_model(config); });
  QuadratureDataset data = stage("sample", [&] {
    return sample_quadratures(fwd.state, config.gamma_h, config.schedule, config.n_samples,
                              config.seed, config.label);
  });
  MleResult est = stage("reconstruct", [&] { return mle_reconstruct(data, config.mle_config()); });
  ReconstructionReport report = stage("analyze", [&] {
    ReconstructionReport rep = analyze_state(est.state, config.label);
    rep.herald_prob = fwd.herald_prob;
    rep.mle_iterations = est.diagnostics.iterations;
    rep.mle_termination = est.diagnostics.termination;
    rep.ll_per_sample = est.diagnostics.ll_per_sample;
    rep.floored_samples = est.diagnostics.floored_samples;
    rep.discarded_tail = fwd.discarded_tail;
    return rep;
  });

  std::optional<BootstrapReport> boot;
  if (config.bootstrap_n > 0) {
    boot = stage("bootstrap", [&] {
      return bootstrap(est.state, data, config.bootstrap_n, config.mle_config(),
                       derive_seed(config.seed, 2));
    });
  }

  if (out_dir) {
    write_dataset(data, *out_dir / "dataset.csv");
    write_state(fwd.state, *out_dir / "forward_state.json");
    write_state(est.state, *out_dir / "state.json");
    write_text(*out_dir / "report.json", report.to_json());
    export_wigner_grid(est.state, default_grid_for_dim(est.state.dim()), *out_dir / "wigner.csv");
    if (boot) write_text(*out_dir / "bootstrap.json", bootstrap_to_json(*boot));
  }
  return PipelineResult{fwd, std::move(data), est.state, std::move(report), std::move(boot)};
}

Table1Result reproduce_table1(const std::optional<std::filesystem::path>& out_dir,
                              int resamples_override) {
  Table1Result result;
  result.all_pass = true;
  for (const Table1Reference& ref : kTable1) {
    ExperimentConfig cfg = preset(ref.preset_name);
    if (!ref.band_checks) {
      cfg.bootstrap_n = 0;  // point comparisons only for these rows
    } else if (resamples_override >= 0) {
      cfg.bootstrap_n = resamples_override;
    }
    std::optional<std::filesystem::path> row_dir;
    if (out_dir) row_dir = *out_dir / ref.preset_name;
    PipelineResult run = run_pipeline(cfg, row_dir);

    Table1Row row;
    row.name = ref.row_name;
    row.herald_prob = run.forward.herald_prob;
    auto add = [&](const char* metric, double reference, double value, double tol) {
      Table1Check c{metric, reference, value, tol * ref.tol_scale, false};
      c.pass = std::abs(value - reference) <= c.tolerance;
      row.checks.push_back(c);
      result.all_pass = result.all_pass && c.pass;
    };
    add("W_min", ref.w_min, run.report.w_min.w_min, 0.05);
    add("mean_photon", ref.mean_n, run.report.mean_photon, 0.35);
    add("fidelity", ref.fidelity, run.report.css.fidelity, 0.08);
    add("alpha", ref.alpha, std::abs(run.report.css.alpha), 0.20);

    if (ref.band_checks && run.bootstrap_report) {
      const BootstrapReport& b = *run.bootstrap_report;
      auto band = [&](const char* metric, double reference, const PercentileTriple& t) {
        Table1Check c{metric, reference, t.point, 0.0, false};
        c.pass = (reference >= t.p16 && reference <= t.p84);
        row.band_checks.push_back(c);
        result.all_pass = result.all_pass && c.pass;
      };
      band("fidelity_band", ref.fidelity, b.fidelity);
      band("alpha_band", ref.alpha, b.alpha);
    }
    result.rows.push_back(std::move(row));
  }
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_text(*out_dir / "table1.json", result.to_json());
  }
  return result;
}

std::string Table1Result::to_json() const {
  json rows_json = json::array();
  for (const Table1Row& row : rows) {
    json r;
    r["name"] = row.name;
    r["herald_prob"] = row.herald_prob;
    json checks = json::array();
    for (const Table1Check& c : row.checks) {
      checks.push_back({{"metric", c.metric},
                        {"reference", c.reference},
                        {"value", c.value},
                        {"tolerance", c.tolerance},
                        {"pass", c.pass}});
    }
    r["checks"] = checks;
    json bands = json::array();
    for (const Table1Check& c : row.band_checks) {
      bands.push_back({{"metric", c.metric},
                       {"reference", c.reference},
                       {"point", c.value},
                       {"pass", c.pass}});
    }
    r["band_checks"] = bands;
    rows_json.push_back(r);
  }
  json j;
  j["rows"] = rows_json;
  j["all_pass"] = all_pass;
  return j.dump(2) + "\n";
}

void export_wigner_grid(const DensityMatrix& rho, const PhaseSpaceGrid& grid,
                        const std::filesystem::path& path) {
  grid.validate();
  Eigen::MatrixXd values = wigner_grid_values(rho, grid);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_wigner_grid: cannot open " + path.string());
  out << "# catsim-wigner-v1 q_min=" << format_sig9(grid.q_min)
      << " q_max=" << format_sig9(grid.q_max) << " n_q=" << grid.n_q
      << " p_min=" << format_sig9(grid.p_min) << " p_max=" << format_sig9(grid.p_max)
      << " n_p=" << grid.n_p << '\n';
  out << "# state_digest=" << state_digest(rho) << '\n';
  out << "q,p,W\n";
  for (int i = 0; i < grid.n_q; ++i) {
    for (int j = 0; j < grid.n_p; ++j) {
      out << format_sig9(grid.q(i)) << ',' << format_sig9(grid.p(j)) << ','
          << format_sig9(values(i, j)) << '\n';
    }
  }
  if (!out) throw std::runtime_error("export_wigner_grid: write failed");
}

Eigen::MatrixXd read_wigner_grid(const std::filesystem::path& path, PhaseSpaceGrid* grid_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_wigner_grid: cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("read_wigner_grid: missing header");
  PhaseSpaceGrid grid;
  if (std::sscanf(header.c_str(),
                  "# catsim-wigner-v1 q_min=%lf q_max=%lf n_q=%d p_min=%lf p_max=%lf n_p=%d",
                  &grid.q_min, &grid.q_max, &grid.n_q, &grid.p_min, &grid.p_max,
                  &grid.n_p) != 6) {
    throw std::runtime_error("read_wigner_grid: malformed header");
  }
  std::string line;
  std::getline(in, line);  // digest line
  std::getline(in, line);  // column names
  Eigen::MatrixXd values(grid.n_q, grid.n_p);
  for (int i = 0; i < grid.n_q; ++i) {
    for (int j = 0; j < grid.n_p; ++j) {
      if (!std::getline(in, line)) throw std::runtime_error("read_wigner_grid: truncated file");
      double q, p, w;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &q, &p, &w) != 3) {
        throw std::runtime_error("read_wigner_grid: malformed row '" + line + "'");
      }
      values(i, j) = w;
    }
  }
  if (grid_out) *grid_out = grid;
  return values;
}

void write_state(const DensityMatrix& rho, const std::filesystem::path& path) {
  json j;
  j["format"] = "catsim-state-v1";
  j["dim"] = rho.dim();
  json elems = json::array();
  for (int m = 0; m < rho.dim(); ++m) {
    for (int n = 0; n < rho.dim(); ++n) {
      elems.push_back(json::array({rho(m, n).real(), rho(m, n).imag()}));
    }
  }
  j["elements"] = std::move(elems);
  write_text(path, j.dump() + "\n");
}

DensityMatrix read_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_state: cannot open " + path.string());
  json j = json::parse(in);
  if (j.value("format", "") != "catsim-state-v1") {
    throw std::runtime_error("read_state: unknown format");
  }
  int d = j.at("dim").get<int>();
  const json& elems = j.at("elements");
  if (static_cast<int>(elems.size()) != d * d) {
    throw std::runtime_error("read_state: element count mismatch");
  }
  Eigen::MatrixXcd m(d, d);
  int idx = 0;
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c, ++idx) {
      m(r, c) = Complex(elems[idx][0].get<double>(), elems[idx][1].get<double>());
    }
  }
  return DensityMatrix(m);
}

std::string state_digest(const DensityMatrix& rho) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      hash ^= ch;
      hash *= 0x100000001b3ULL;
    }
  };
  feed(std::to_string(rho.dim()));
  for (int m = 0; m < rho.dim(); ++m) {
    for (int n = 0; n < rho.dim(); ++n) {
      feed(format_full(rho(m, n).real()));
      feed(format_full(rho(m, n).imag()));
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace catsim
