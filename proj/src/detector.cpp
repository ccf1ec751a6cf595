#include "portwatch/detector.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace portwatch {

void DetectorConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(lambda)) throw std::invalid_argument("DetectorConfig: lambda must lie in (0, 1)");
  if (!in_unit(lambda_mu)) throw std::invalid_argument("DetectorConfig: lambda_mu must lie in (0, 1)");
  if (!in_unit(lambda_sigma)) throw std::invalid_argument("DetectorConfig: lambda_sigma must lie in (0, 1)");
  if (!in_unit(eta)) throw std::invalid_argument("DetectorConfig: eta must lie in (0, 1)");
  if (!(control_limit >= 0.0)) throw std::invalid_argument("DetectorConfig: control_limit must be >= 0");
  if (!(reg_guard > 0.0)) throw std::invalid_argument("DetectorConfig: reg_guard must be > 0");
  if (!(var_fraction > 0.0 && var_fraction <= 1.0))
    throw std::invalid_argument("DetectorConfig: var_fraction must lie in (0, 1]");
  if (warmup_len < 1) throw std::invalid_argument("DetectorConfig: warmup_len must be >= 1");
  if (reg_guard <= control_limit) {
    // Legal but worth flagging: excursions between the guard and the control
    // limit freeze the residual trackers without raising an alert.  Emitted
    // once per process (the tuner validates thousands of configs).
    static bool warned = false;
    if (!warned) {
      warned = true;
      std::cerr << "DetectorConfig: reg_guard (" << reg_guard << ") <= control_limit (" << control_limit
                << "); tracker updates freeze before alerts fire\n";
    }
  }
}

DetectorState init_from_warmup(const Eigen::Ref<const Matrix<double>>& x_warmup, const DetectorConfig& config,
                               Index forced_k) {
  if (x_warmup.cols() != config.warmup_len)
    throw std::invalid_argument("init_from_warmup: expected warmup_len columns");
  if (x_warmup.cols() < 2) throw std::invalid_argument("init_from_warmup: need at least two warm-up columns");

  DetectorState state;
  state.subspace = batch_pca(x_warmup, config.var_fraction, forced_k);
  state.nu_x = x_warmup.rowwise().mean();

  // Warm-up residuals through the freshly fitted (orthonormal) subspace.
  Matrix<double> centered = x_warmup.colwise() - state.nu_x;
  Matrix<double> residuals = centered;
  if (state.subspace.k() > 0) {
    residuals.noalias() -= state.subspace.basis * (state.subspace.basis.transpose() * centered);
  }
  state.nu_r = residuals.rowwise().mean();
  state.sigma2_r = (residuals.colwise() - state.nu_r).rowwise().squaredNorm() /
                   static_cast<double>(x_warmup.cols());

  Index floored = 0;
  for (Index j = 0; j < state.sigma2_r.size(); ++j) {
    if (state.sigma2_r[j] < kVarianceFloor) {
      state.sigma2_r[j] = kVarianceFloor;
      ++floored;
    }
  }
  if (floored > 0) {
    std::cerr << "init_from_warmup: floored near-zero residual variance on " << floored << " stream(s)\n";
  }
  state.tick = config.warmup_len;
  return state;
}

namespace {

struct StepScratch {
  Vector<double> w;
};

// Shared tick recursion.  `flags` must be a p-length scratch marked with the
// previous alert set; on return it is re-marked with the new one.  Returns
// alerts through `alerts_out` (cleared first).
void step_core(DetectorState& state, const double* x, const DetectorConfig& cfg,
               std::vector<std::uint8_t>& flags, StepScratch& scratch, Vector<double>& residual,
               std::vector<Index>& alerts_out) {
  const Index p = state.p();
  const Index k = state.subspace.k();
  const double lam = cfg.lambda;
  const double lam_mu = cfg.lambda_mu;
  const double lam_sigma = cfg.lambda_sigma;
  const double guard = cfg.reg_guard;
  const double limit = cfg.control_limit;

  // (1) data mean, frozen on streams alerted last tick
  double* nu_x = state.nu_x.data();
  if (state.last_alerts.empty()) {
    for (Index j = 0; j < p; ++j) nu_x[j] += lam * (x[j] - nu_x[j]);
  } else {
    for (Index j = 0; j < p; ++j) {
      if (!flags[static_cast<std::size_t>(j)]) nu_x[j] += lam * (x[j] - nu_x[j]);
    }
  }

  // (2) residual through the current subspace
  residual.resize(p);
  double* r = residual.data();
  for (Index j = 0; j < p; ++j) r[j] = x[j] - nu_x[j];
  Vector<double>& w = scratch.w;
  if (k > 0) {
    w.resize(k);
    w.noalias() = state.subspace.basis.transpose() * residual;
    residual.noalias() -= state.subspace.basis * w;
  }

  // (3) Oja step with the same centered vector c = x - nu_x (recomputed
  // coordinate-wise; `residual` already lost its span component) and the
  // coefficients w = B^T c from the projection.
  if (k > 0 && cfg.eta > 0.0) {
    Matrix<double>& basis = state.subspace.basis;
    for (Index j = 0; j < k; ++j) {
      const double scale = cfg.eta * w[j];
      double* col = basis.col(j).data();
      for (Index i = 0; i < p; ++i) col[i] += scale * (x[i] - nu_x[i]);
    }
    orthonormalize_columns(basis);
  }

  // (4)-(6) per-stream scalar recursions
  for (const Index j : state.last_alerts) flags[static_cast<std::size_t>(j)] = 0;
  alerts_out.clear();
  double* nu_r = state.nu_r.data();
  double* sig2 = state.sigma2_r.data();
  for (Index j = 0; j < p; ++j) {
    const double sd_old = std::sqrt(sig2[j]);
    if (std::abs(r[j]) < guard * sd_old) nu_r[j] += lam_mu * (r[j] - nu_r[j]);
    const double d = r[j] - nu_r[j];
    const double ad = std::abs(d);
    if (ad < guard * sd_old) sig2[j] += lam_sigma * (d * d - sig2[j]);
    if (ad > limit * std::sqrt(sig2[j])) {
      alerts_out.push_back(j);
      flags[static_cast<std::size_t>(j)] = 1;
    }
  }
  state.last_alerts = alerts_out;
  ++state.tick;
}

}  // namespace

StepResult step(DetectorState& state, const Eigen::Ref<const Vector<double>>& x, const DetectorConfig& config) {
  if (x.size() != state.p()) throw std::invalid_argument("step: x has wrong length");
  if (!x.allFinite()) throw std::domain_error("step: non-finite coordinate in x at tick " + std::to_string(state.tick));
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(state.p()), 0);
  for (const Index j : state.last_alerts) flags[static_cast<std::size_t>(j)] = 1;
  StepResult out;
  StepScratch scratch;
  // Ref is not guaranteed contiguous-stride; copy to a dense vector once.
  const Vector<double> dense = x;
  step_core(state, dense.data(), config, flags, scratch, out.residual, out.alerts);
  return out;
}

RunResult run_stream(const Eigen::Ref<const Matrix<double>>& x, const DetectorConfig& config, Index forced_k) {
  config.validate();
  const Index p = x.rows();
  const Index T = x.cols();
  const Index n0 = config.warmup_len;
  if (T <= n0) throw std::invalid_argument("run_stream: T must exceed warmup_len");

  DetectorState state = init_from_warmup(x.leftCols(n0), config, forced_k);

  RunResult out;
  out.alerts.p = p;
  out.alerts.T = T;
  out.residuals.resize(p, T - n0);

  std::vector<std::uint8_t> flags(static_cast<std::size_t>(p), 0);
  StepScratch scratch;
  Vector<double> residual(p);
  Vector<double> column(p);
  std::vector<Index> alerts;
  for (Index t = n0; t < T; ++t) {
    if (!x.col(t).allFinite()) {
      out.skipped_ticks.push_back(t);
      out.residuals.col(t - n0).setConstant(std::numeric_limits<double>::quiet_NaN());
      state.tick = t + 1;  // keep the clock aligned; statistics untouched
      continue;
    }
    column = x.col(t);
    step_core(state, column.data(), config, flags, scratch, residual, alerts);
    out.residuals.col(t - n0) = residual;
    for (const Index j : alerts) {
      const double d = residual[j] - state.nu_r[j];
      out.alerts.records.push_back(AlertRecord{t, j, residual[j], std::abs(d),
                                               config.control_limit * std::sqrt(state.sigma2_r[j])});
    }
  }
  if (!out.skipped_ticks.empty()) {
    std::cerr << "run_stream: skipped " << out.skipped_ticks.size() << " non-finite tick(s)\n";
  }
  return out;
}

StreamCounts run_counts(DetectorState state, const Eigen::Ref<const Matrix<double>>& x,
                        const Eigen::Ref<const BoolMatrix>& mask, const DetectorConfig& config,
                        Index start_tick) {
  const Index p = x.rows();
  const Index T = x.cols();
  if (mask.rows() != p || mask.cols() != T) throw std::invalid_argument("run_counts: mask shape mismatch");
  if (start_tick < 0 || start_tick >= T) throw std::invalid_argument("run_counts: start_tick out of range");

  StreamCounts counts;
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(p), 0);
  for (const Index j : state.last_alerts) flags[static_cast<std::size_t>(j)] = 1;
  StepScratch scratch;
  Vector<double> residual(p);
  Vector<double> column(p);
  std::vector<Index> alerts;
  std::vector<std::uint8_t> alerted(static_cast<std::size_t>(p), 0);
  for (Index t = start_tick; t < T; ++t) {
    column = x.col(t);
    if (!column.allFinite()) {
      // A skipped tick predicts nothing, which is how record-based
      // evaluation sees it too.
      state.tick = t + 1;
      bool any_actual = false;
      for (Index j = 0; j < p; ++j) {
        if (mask(j, t)) {
          ++counts.indiv_fn;
          any_actual = true;
        } else {
          ++counts.indiv_tn;
        }
      }
      if (any_actual) ++counts.rows_fn;
      else ++counts.rows_tn;
      continue;
    }
    step_core(state, column.data(), config, flags, scratch, residual, alerts);

    std::fill(alerted.begin(), alerted.end(), 0);
    for (const Index j : alerts) alerted[static_cast<std::size_t>(j)] = 1;
    bool any_actual = false;
    for (Index j = 0; j < p; ++j) {
      const bool actual = mask(j, t);
      const bool predicted = alerted[static_cast<std::size_t>(j)] != 0;
      any_actual = any_actual || actual;
      if (actual && predicted) ++counts.indiv_tp;
      else if (!actual && predicted) ++counts.indiv_fp;
      else if (actual && !predicted) ++counts.indiv_fn;
      else ++counts.indiv_tn;
    }
    const bool any_predicted = !alerts.empty();
    if (any_actual && any_predicted) ++counts.rows_tp;
    else if (!any_actual && any_predicted) ++counts.rows_fp;
    else if (any_actual && !any_predicted) ++counts.rows_fn;
    else ++counts.rows_tn;
  }
  return counts;
}

DetectorConfig parse_detector_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_detector_config: cannot open " + path);
  DetectorConfig cfg;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("parse_detector_config: " + path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || ptr != value.data() + value.size())
      throw std::runtime_error("parse_detector_config: " + path + ":" + std::to_string(lineno) +
                               ": bad numeric value '" + value + "'");
    if (key == "lambda") cfg.lambda = parsed;
    else if (key == "lambda_mu") cfg.lambda_mu = parsed;
    else if (key == "lambda_sigma") cfg.lambda_sigma = parsed;
    else if (key == "eta") cfg.eta = parsed;
    else if (key == "control_limit") cfg.control_limit = parsed;
    else if (key == "reg_guard") cfg.reg_guard = parsed;
    else if (key == "var_fraction") cfg.var_fraction = parsed;
    else if (key == "warmup_len") cfg.warmup_len = static_cast<Index>(parsed);
    else
      throw std::runtime_error("parse_detector_config: " + path + ":" + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

namespace {

void write_value(std::ostream& os, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  os.write(buf, res.ptr - buf);
  os.put('\n');
}

double read_value(std::istream& is, const char* what) {
  std::string token;
  if (!(is >> token)) throw std::runtime_error(std::string("load_checkpoint: truncated file at ") + what);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw std::runtime_error(std::string("load_checkpoint: bad value for ") + what + ": '" + token + "'");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const DetectorState& state) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const Index p = state.p();
  const Index k = state.subspace.k();
  out << p << '\n' << k << '\n';
  for (Index j = 0; j < p; ++j) write_value(out, state.nu_x[j]);
  for (Index j = 0; j < p; ++j) write_value(out, state.nu_r[j]);
  for (Index j = 0; j < p; ++j) write_value(out, state.sigma2_r[j]);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < p; ++i) write_value(out, state.subspace.basis(i, c));
  out << state.tick << '\n';
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

DetectorState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  const auto p = static_cast<Index>(read_value(in, "p"));
  const auto k = static_cast<Index>(read_value(in, "k"));
  if (p < 1 || k < 0 || k > p) throw std::runtime_error("load_checkpoint: invalid dimensions in " + path);
  DetectorState state;
  state.nu_x.resize(p);
  state.nu_r.resize(p);
  state.sigma2_r.resize(p);
  for (Index j = 0; j < p; ++j) state.nu_x[j] = read_value(in, "nu_x");
  for (Index j = 0; j < p; ++j) state.nu_r[j] = read_value(in, "nu_r");
  for (Index j = 0; j < p; ++j) {
    state.sigma2_r[j] = read_value(in, "sigma2_r");
    if (!(state.sigma2_r[j] > 0.0)) throw std::runtime_error("load_checkpoint: non-positive sigma2_r");
  }
  state.subspace.basis.resize(p, k);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < p; ++i) state.subspace.basis(i, c) = read_value(in, "basis");
  state.subspace.eigenvalues = Vector<double>::Zero(k);
  state.tick = static_cast<Index>(read_value(in, "tick"));
  if (state.tick < 0) throw std::runtime_error("load_checkpoint: negative tick");
  return state;
}

}  // namespace portwatch
