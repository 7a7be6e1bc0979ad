#include "catsim/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "catsim/math.hpp"
#include "catsim/optics.hpp"

namespace catsim {

namespace {

std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

}  // namespace

PhaseSchedule PhaseSchedule::sawtooth(int n_phases, int cycles) {
  PhaseSchedule s;
  s.kind = Kind::Sawtooth;
  s.n_phases = n_phases;
  s.cycles = cycles;
  s.validate();
  return s;
}

PhaseSchedule PhaseSchedule::uniform_random() {
  PhaseSchedule s;
  s.kind = Kind::UniformRandom;
  return s;
}

void PhaseSchedule::validate() const {
  if (kind == Kind::Sawtooth && (n_phases < 1 || cycles < 1)) {
    throw std::invalid_argument("PhaseSchedule: sawtooth needs n_phases >= 1, cycles >= 1");
  }
}

std::vector<double> PhaseSchedule::phases(int n_samples, Rng& rng) const {
  validate();
  if (n_samples < 1) throw std::invalid_argument("PhaseSchedule: n_samples must be >= 1");
  std::vector<double> out(n_samples);
  if (kind == Kind::UniformRandom) {
    for (int i = 0; i < n_samples; ++i) out[i] = 2.0 * M_PI * rng.uniform();
    return out;
  }
  // Position within the sweep in exact integer arithmetic, quantized to
  // n_phases levels over [0, pi).
  for (int i = 0; i < n_samples; ++i) {
    std::int64_t pos = (static_cast<std::int64_t>(i) * cycles) % n_samples;
    std::int64_t level = (pos * n_phases) / n_samples;
    out[i] = M_PI * static_cast<double>(level) / n_phases;
  }
  return out;
}

void QuadratureDataset::validate() const {
  if (theta.empty() || theta.size() != x.size()) {
    throw std::invalid_argument("QuadratureDataset: empty or mismatched records");
  }
  if (gamma_h < 0.0 || gamma_h >= 1.0) {
    throw std::invalid_argument("QuadratureDataset: gamma_h must be in [0, 1)");
  }
}

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho, double theta) {
  const int d = rho.dim();
  // pr(x) = psi(x)^T Re(rho_theta) psi(x) with rho_theta = R(theta)^dag rho R(theta).
  Eigen::VectorXcd ph(d);
  for (int n = 0; n < d; ++n) ph(n) = std::exp(Complex(0.0, n * theta));
  Eigen::MatrixXd m = (ph.asDiagonal() * rho.matrix() * ph.conjugate().asDiagonal()).real();
  std::vector<double> psi(d);
  auto pdf = [&](double xv) {
    math::oscillator_psi(xv, psi);
    double val = 0.0;
    for (int a = 0; a < d; ++a) {
      val += psi[a] * psi[a] * m(a, a);
      for (int b = a + 1; b < d; ++b) val += 2.0 * psi[a] * psi[b] * m(a, b);
    }
    return std::max(val, 0.0);
  };
  build(pdf, d);
}

QuadratureSampler::QuadratureSampler(const Eigen::VectorXcd& coeffs, double theta) {
  const int d = static_cast<int>(coeffs.size());
  Eigen::VectorXcd c(d);
  for (int n = 0; n < d; ++n) c(n) = coeffs(n) * std::exp(Complex(0.0, n * theta));
  std::vector<double> psi(d);
  auto pdf = [&](double xv) {
    math::oscillator_psi(xv, psi);
    Complex amp = 0.0;
    for (int n = 0; n < d; ++n) amp += c(n) * psi[n];
    return std::norm(amp);
  };
  build(pdf, d);
}

template <typename Pdf>
void QuadratureSampler::build(const Pdf& pdf, int dim) {
  const double limit = std::sqrt(2.0 * dim);
  const int coarse = 128;
  const double mass_cap = 1e-3;
  const double err_cap = 1e-10;
  const int max_depth = 18;

  struct Panel {
    double a, b, fa, fb;
    int depth;
  };
  // Depth-first, left side first, so finished panels come out in order.
  std::vector<Panel> stack;
  std::vector<Panel> done;
  for (int i = coarse - 1; i >= 0; --i) {
    double a = -limit + 2.0 * limit * i / coarse;
    double b = -limit + 2.0 * limit * (i + 1) / coarse;
    stack.push_back({a, b, pdf(a), pdf(b), 0});
  }
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    double mid = 0.5 * (p.a + p.b);
    double fm = pdf(mid);
    double h = p.b - p.a;
    double trap = 0.5 * h * (p.fa + p.fb);
    double simp = h * (p.fa + 4.0 * fm + p.fb) / 6.0;
    if (p.depth < max_depth && (std::abs(simp - trap) > err_cap || simp > mass_cap)) {
      stack.push_back({mid, p.b, fm, p.fb, p.depth + 1});
      stack.push_back({p.a, mid, p.fa, fm, p.depth + 1});
    } else {
      done.push_back(p);
    }
  }

  xs_.resize(done.size() + 1);
  pdfs_.resize(done.size() + 1);
  cums_.resize(done.size() + 1);
  xs_[0] = done.front().a;
  pdfs_[0] = done.front().fa;
  cums_[0] = 0.0;
  for (size_t i = 0; i < done.size(); ++i) {
    xs_[i + 1] = done[i].b;
    pdfs_[i + 1] = done[i].fb;
    cums_[i + 1] = cums_[i] + 0.5 * (done[i].b - done[i].a) * (done[i].fa + done[i].fb);
  }
  total_ = cums_.back();
  if (!(total_ > 0.0)) {
    throw std::runtime_error("QuadratureSampler: distribution has no mass in range");
  }
  tail_ = std::max(0.0, 1.0 - total_);
  for (auto& c : cums_) c /= total_;
}

double QuadratureSampler::sample(double u) const {
  u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
  auto it = std::upper_bound(cums_.begin(), cums_.end(), u);
  size_t hi = std::min<size_t>(std::distance(cums_.begin(), it), cums_.size() - 1);
  size_t lo = hi - 1;
  double a = xs_[lo], b = xs_[hi];
  double fa = pdfs_[lo], fb = pdfs_[hi];
  double m = (u - cums_[lo]) * total_;  // mass to absorb inside the panel
  double s = (fb - fa) / (b - a);
  double t;
  if (std::abs(s) < 1e-300) {
    t = (fa > 0.0) ? m / fa : 0.0;
  } else {
    double disc = std::max(fa * fa + 2.0 * s * m, 0.0);
    t = (std::sqrt(disc) - fa) / s;
  }
  return std::clamp(a + t, a, b);
}

double QuadratureSampler::cdf(double x) const {
  if (x <= xs_.front()) return 0.0;
  if (x >= xs_.back()) return 1.0;
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  size_t hi = std::distance(xs_.begin(), it);
  size_t lo = hi - 1;
  double a = xs_[lo], b = xs_[hi];
  double fa = pdfs_[lo], fb = pdfs_[hi];
  double t = x - a;
  double s = (fb - fa) / (b - a);
  return cums_[lo] + (fa * t + 0.5 * s * t * t) / total_;
}

QuadratureDataset sample_quadratures(const DensityMatrix& rho, double gamma_h,
                                     const PhaseSchedule& schedule, int n_samples,
                                     std::uint64_t seed, std::string source_label) {
  if (n_samples < 1) throw std::invalid_argument("sample_quadratures: n_samples must be >= 1");
  if (gamma_h < 0.0 || gamma_h >= 1.0) {
    throw std::invalid_argument("sample_quadratures: gamma_h must be in [0, 1)");
  }
  DensityMatrix lossy = (gamma_h > 0.0) ? LossChannel(gamma_h).apply(rho) : rho;

  Rng rng(seed);
  QuadratureDataset data;
  data.gamma_h = gamma_h;
  data.seed = seed;
  data.source_label = std::move(source_label);
  data.theta = schedule.phases(n_samples, rng);
  data.x.resize(n_samples);

  std::vector<double> us(n_samples);
  for (int i = 0; i < n_samples; ++i) us[i] = rng.uniform();

  std::map<double, std::vector<int>> groups;
  for (int i = 0; i < n_samples; ++i) groups[data.theta[i]].push_back(i);

  if (groups.size() <= 1024) {
    for (const auto& [th, idx] : groups) {
      QuadratureSampler sampler(lossy, th);
      for (int i : idx) data.x[i] = sampler.sample(us[i]);
    }
  } else {
    // Many distinct phases (i.i.d. random schedule): sample the spectral
    // mixture instead of tabulating a CDF per phase. Pick an eigencomponent,
    // then invert that component's 1-D distribution.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lossy.matrix());
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    lam /= lam.sum();
    Rng pick_rng(derive_seed(seed, 1));
    for (int i = 0; i < n_samples; ++i) {
      double u = pick_rng.uniform();
      double acc = 0.0;
      int r = lossy.dim() - 1;  // eigenvalues ascend; scan from the largest
      for (; r > 0; --r) {
        acc += lam(r);
        if (u < acc) break;
      }
      QuadratureSampler sampler(es.eigenvectors().col(r), data.theta[i]);
      data.x[i] = sampler.sample(us[i]);
    }
  }
  data.validate();
  return data;
}

void write_dataset(const QuadratureDataset& data, const std::filesystem::path& path) {
  data.validate();
  if (data.source_label.find_first_of(",\n\r") != std::string::npos) {
    throw std::invalid_argument("write_dataset: label must not contain commas or newlines");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset: cannot open " + path.string());
  out << "catsim-quad-v1," << format_sig9(data.gamma_h) << ',' << data.seed << ','
      << data.source_label << ',' << data.size() << '\n';
  for (int i = 0; i < data.size(); ++i) {
    out << format_sig9(data.theta[i]) << ',' << format_sig9(data.x[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write_dataset: write failed for " + path.string());
}

QuadratureDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_dataset: missing header");
  std::istringstream hs(line);
  std::string version, gamma_s, seed_s, label, count_s;
  if (!std::getline(hs, version, ',') || !std::getline(hs, gamma_s, ',') ||
      !std::getline(hs, seed_s, ',') || !std::getline(hs, label, ',') ||
      !std::getline(hs, count_s)) {
    throw std::runtime_error("read_dataset: malformed header");
  }
  if (version != "catsim-quad-v1") {
    throw std::runtime_error("read_dataset: unknown format version '" + version + "'");
  }
  QuadratureDataset data;
  data.gamma_h = std::stod(gamma_s);
  data.seed = std::stoull(seed_s);
  data.source_label = label;
  long count = std::stol(count_s);
  data.theta.reserve(count);
  data.x.reserve(count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("read_dataset: malformed record '" + line + "'");
    }
    data.theta.push_back(std::stod(line.substr(0, comma)));
    data.x.push_back(std::stod(line.substr(comma + 1)));
  }
  if (data.size() != count) {
    throw std::runtime_error("read_dataset: record count mismatch (header " +
                             std::to_string(count) + ", found " +
                             std::to_string(data.size()) + ")");
  }
  data.validate();
  return data;
}

}  // namespace catsim
