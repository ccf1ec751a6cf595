// portwatch: streaming per-port anomaly watcher for network-telescope
// telemetry.  Subcommands cover dataset synthesis, the streaming detector,
// the chi-square baseline, evaluation/tuning, and the theory experiments.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "portwatch/csv.hpp"
#include "portwatch/detector.hpp"
#include "portwatch/experiments.hpp"
#include "portwatch/factor_model.hpp"
#include "portwatch/ingest.hpp"
#include "portwatch/manifest.hpp"
#include "portwatch/metrics.hpp"
#include "portwatch/qstat.hpp"
#include "portwatch/special.hpp"
#include "portwatch/synth.hpp"
#include "portwatch/theory.hpp"
#include "portwatch/tuner.hpp"

namespace pw = portwatch;

namespace {

// Relative output paths are placed under $PORTWATCH_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
  if (path.empty()) return path;
  const char* base = std::getenv("PORTWATCH_OUT_DIR");
  if (base == nullptr || *base == '\0') return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).string();
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::runtime_error(flag + ": bad number '" + item + "'");
    }
  }
  if (out.empty()) throw std::runtime_error(flag + ": empty list");
  return out;
}

std::vector<pw::Index> parse_index_list(const std::string& csv, const std::string& flag) {
  std::vector<pw::Index> out;
  for (const double v : parse_double_list(csv, flag)) out.push_back(static_cast<pw::Index>(v));
  return out;
}

std::string fmt(double v) { return pw::format_double(v); }

struct ManifestBuilder {
  pw::RunManifest m;

  ManifestBuilder(std::string subcommand, std::uint64_t seed) {
    m.subcommand = std::move(subcommand);
    m.seed = seed;
  }
  void cfg(const std::string& key, const std::string& value) { m.config[key] = value; }
  void cfg(const std::string& key, double value) { m.config[key] = fmt(value); }
  void cfg(const std::string& key, pw::Index value) { m.config[key] = std::to_string(value); }
  void in(const std::string& path) {
    if (!path.empty()) m.inputs.push_back(path);
  }
  void out(const std::string& path) {
    if (!path.empty()) m.outputs.push_back(path);
  }
  // Writes next to the first recorded output.
  void write() const {
    if (m.outputs.empty()) throw std::runtime_error("manifest: no outputs recorded");
    pw::write_manifest(m, m.outputs.front());
  }
};

// Shared ingestion path for detect/baseline-q: raw load, top-k on raw sums,
// then the optional log transform.
pw::LoadedSeries ingest(const std::string& input, bool log_transform, pw::Index top_k) {
  pw::IngestOptions options;  // transform applied manually below
  pw::LoadedSeries loaded = pw::load_timeseries_csv(input, options);
  if (top_k >= 0) {
    const auto indices = pw::top_k_stream_indices(loaded.data, top_k);
    pw::SeriesMatrix selected(static_cast<pw::Index>(indices.size()), loaded.data.cols());
    std::vector<std::string> names;
    names.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      selected.row(static_cast<pw::Index>(i)) = loaded.data.row(indices[i]);
      names.push_back(loaded.names[static_cast<std::size_t>(indices[i])]);
    }
    loaded.data = std::move(selected);
    loaded.names = std::move(names);
  }
  if (log_transform) pw::apply_log_transform(loaded.data);
  return loaded;
}

int run_generate(pw::Index p, pw::Index T, pw::Index k, double hurst, double variance, double amplitude,
                 double snr, pw::Index duration, pw::Index start, pw::Index n_streams, pw::Index warmup,
                 std::uint64_t seed, const std::string& data_out, const std::string& mask_out) {
  const pw::FactorModel model = pw::default_factor_model(p, k, seed, amplitude, hurst, variance);
  pw::AnomalySpec anomaly;
  anomaly.snr = snr;
  anomaly.duration_ticks = duration;
  anomaly.start_tick = start;
  anomaly.streams.clear();
  for (pw::Index j = 0; j < n_streams; ++j) anomaly.streams.push_back(j);
  const pw::LabeledDataset dataset = pw::synthesize_dataset(model, anomaly, T, seed, warmup);

  pw::write_series_csv(data_out, dataset.data);
  pw::write_mask_csv(mask_out, dataset.mask.cells);

  ManifestBuilder mb("generate", seed);
  mb.cfg("p", p);
  mb.cfg("T", T);
  mb.cfg("k", k);
  mb.cfg("hurst", hurst);
  mb.cfg("variance", variance);
  mb.cfg("amplitude", amplitude);
  mb.cfg("snr", snr);
  mb.cfg("duration", duration);
  mb.cfg("start", start);
  mb.cfg("streams", n_streams);
  mb.cfg("warmup", warmup);
  mb.out(data_out);
  mb.out(mask_out);
  mb.write();
  return 0;
}

int run_detect(const std::string& input, const std::string& config_path, const std::string& alerts_out,
               const std::string& residuals_out, const std::string& checkpoint, bool log_transform,
               pw::Index top_k) {
  pw::DetectorConfig config;
  if (!config_path.empty()) config = pw::parse_detector_config(config_path);
  config.validate();

  const pw::LoadedSeries loaded = ingest(input, log_transform, top_k);
  const pw::Index p = loaded.data.rows();
  const pw::Index n_cols = loaded.data.cols();

  pw::AlertMatrix alerts;
  pw::Matrix<double> residuals;
  pw::Index residual_tick0 = 0;

  const bool resume = !checkpoint.empty() && std::filesystem::exists(checkpoint);
  if (resume) {
    // Continuation: every input column is a new tick for the restored state.
    pw::DetectorState state = pw::load_checkpoint(checkpoint);
    if (state.p() != p)
      throw std::runtime_error("detect: checkpoint dimension " + std::to_string(state.p()) +
                               " does not match input streams " + std::to_string(p));
    alerts.p = p;
    alerts.T = state.tick + n_cols;
    residual_tick0 = state.tick;
    residuals.resize(p, n_cols);
    pw::Index skipped = 0;
    for (pw::Index t = 0; t < n_cols; ++t) {
      if (!loaded.data.col(t).allFinite()) {
        residuals.col(t).setConstant(std::numeric_limits<double>::quiet_NaN());
        ++state.tick;
        ++skipped;
        continue;
      }
      const pw::StepResult result = pw::step(state, loaded.data.col(t), config);
      residuals.col(t) = result.residual;
      for (const pw::Index j : result.alerts) {
        const double d = result.residual[j] - state.nu_r[j];
        alerts.records.push_back(pw::AlertRecord{state.tick - 1, j, result.residual[j], std::abs(d),
                                                 config.control_limit * std::sqrt(state.sigma2_r[j])});
      }
    }
    if (skipped > 0) std::cerr << "detect: skipped " << skipped << " non-finite tick(s)\n";
    pw::save_checkpoint(checkpoint, state);
  } else {
    pw::RunResult result = pw::run_stream(loaded.data, config);
    alerts = std::move(result.alerts);
    residuals = std::move(result.residuals);
    residual_tick0 = config.warmup_len;
    if (!checkpoint.empty()) {
      // Re-derive the final state for the dump (run_stream does not expose
      // it): replay is cheap relative to the run itself only for short
      // tails, so instead recompute from scratch via the same path.
      pw::DetectorState state = pw::init_from_warmup(loaded.data.leftCols(config.warmup_len), config);
      for (pw::Index t = config.warmup_len; t < n_cols; ++t) {
        if (!loaded.data.col(t).allFinite()) {
          state.tick = t + 1;
          continue;
        }
        pw::step(state, loaded.data.col(t), config);
      }
      pw::save_checkpoint(checkpoint, state);
    }
  }

  pw::write_alerts_csv(alerts_out, alerts);
  if (!residuals_out.empty()) pw::write_series_csv(residuals_out, residuals, loaded.names, residual_tick0);

  ManifestBuilder mb("detect", 0);
  mb.cfg("lambda", config.lambda);
  mb.cfg("lambda_mu", config.lambda_mu);
  mb.cfg("lambda_sigma", config.lambda_sigma);
  mb.cfg("eta", config.eta);
  mb.cfg("control_limit", config.control_limit);
  mb.cfg("reg_guard", config.reg_guard);
  mb.cfg("var_fraction", config.var_fraction);
  mb.cfg("warmup_len", config.warmup_len);
  mb.cfg("log_transform", log_transform ? "true" : "false");
  if (top_k >= 0) mb.cfg("top_k", top_k);
  if (!checkpoint.empty()) mb.cfg("checkpoint", checkpoint);
  mb.in(input);
  if (!config_path.empty()) mb.in(config_path);
  mb.out(alerts_out);
  mb.out(residuals_out);
  mb.write();
  return 0;
}

int run_baseline_q(const std::string& input, double alpha, pw::Index warmup, const std::string& out_path,
                   bool log_transform, pw::Index top_k) {
  const pw::LoadedSeries loaded = ingest(input, log_transform, top_k);
  if (loaded.data.cols() <= warmup) throw std::runtime_error("baseline-q: input shorter than warm-up");
  const pw::QDetector q = pw::fit_q_detector(loaded.data.leftCols(warmup), alpha);
  const pw::Vector<double> values = pw::q_values_stream(loaded.data, q, warmup);
  const double threshold = pw::chi2_quantile(static_cast<double>(q.dof), 1.0 - alpha);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("baseline-q: cannot open " + out_path);
  out << "tick,q_value,reject\n";
  for (pw::Index t = 0; t < values.size(); ++t) {
    out << warmup + t << ',' << fmt(values[t]) << ',' << (values[t] > threshold ? '1' : '0') << '\n';
  }
  if (!out) throw std::runtime_error("baseline-q: write failed for " + out_path);

  ManifestBuilder mb("baseline-q", 0);
  mb.cfg("alpha", alpha);
  mb.cfg("warmup", warmup);
  mb.cfg("ridge", q.ridge);
  mb.cfg("log_transform", log_transform ? "true" : "false");
  if (top_k >= 0) mb.cfg("top_k", top_k);
  mb.in(input);
  mb.out(out_path);
  mb.write();
  return 0;
}

int run_evaluate(const std::vector<std::string>& alerts_paths, const std::string& params_csv,
                 const std::string& mask_path, pw::Index test_start, const std::string& report_out,
                 const std::string& roc_out) {
  const pw::BoolMatrix mask = pw::read_mask_csv(mask_path);
  std::vector<double> params;
  if (!params_csv.empty()) {
    params = parse_double_list(params_csv, "--params");
    if (params.size() != alerts_paths.size())
      throw std::runtime_error("evaluate: --params must list one value per --alerts file");
  } else {
    for (std::size_t i = 0; i < alerts_paths.size(); ++i) params.push_back(static_cast<double>(i));
  }

  std::ofstream report(report_out, std::ios::binary);
  if (!report) throw std::runtime_error("evaluate: cannot open " + report_out);
  report << "param,tpr_rows,fpr_rows,tpr_indiv,fpr_indiv,f1,f1_rows\n";
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < alerts_paths.size(); ++i) {
    const pw::AlertMatrix alerts = pw::read_alerts_csv(alerts_paths[i], mask.rows(), mask.cols());
    const pw::EvalReport r = pw::evaluate_alerts(alerts, mask, test_start);
    report << fmt(params[i]) << ',' << fmt(r.tpr_rows) << ',' << fmt(r.fpr_rows) << ',' << fmt(r.tpr_indiv)
           << ',' << fmt(r.fpr_indiv) << ',' << fmt(r.f1) << ',' << fmt(r.f1_rows) << '\n';
    points.emplace_back(r.fpr_rows, r.tpr_rows);
  }
  if (!report) throw std::runtime_error("evaluate: write failed for " + report_out);

  if (!roc_out.empty()) {
    const pw::RocCurve curve = pw::roc_auc(points, params);
    std::ofstream roc(roc_out, std::ios::binary);
    if (!roc) throw std::runtime_error("evaluate: cannot open " + roc_out);
    roc << "param,fpr,tpr\n";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      roc << fmt(curve.params[i]) << ',' << fmt(curve.points[i].first) << ','
          << fmt(curve.points[i].second) << '\n';
    }
    roc << "# auc," << fmt(curve.auc) << '\n';
    if (!roc) throw std::runtime_error("evaluate: write failed for " + roc_out);
  }

  ManifestBuilder mb("evaluate", 0);
  mb.cfg("test_start", test_start);
  for (const auto& path : alerts_paths) mb.in(path);
  mb.in(mask_path);
  mb.out(report_out);
  mb.out(roc_out);
  mb.write();
  return 0;
}

int run_tune(pw::Index p, pw::Index T, pw::Index replications, std::uint64_t seed,
             const std::string& snr_csv, const std::string& durations_csv, const std::string& out_path) {
  const std::vector<double> snrs = parse_double_list(snr_csv, "--snr-list");
  const std::vector<pw::Index> durations = parse_index_list(durations_csv, "--durations");
  std::vector<pw::TuningCellSpec> cells;
  for (const double snr : snrs)
    for (const pw::Index d : durations) cells.push_back(pw::TuningCellSpec{snr, d});

  const pw::TuningGrids grids;
  const pw::DetectorConfig base;
  const auto recs = pw::grid_search_tune(cells, p, T, replications, seed, grids, base);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("tune: cannot open " + out_path);
  out << "snr,duration,L,REG,ewma_data,ewma_mean,ewma_var\n";
  for (const auto& rec : recs) {
    out << fmt(rec.snr) << ',' << fmt(rec.duration_hours) << ',' << fmt(rec.control_limit) << ','
        << fmt(rec.reg_guard) << ',' << fmt(rec.lambda) << ',' << fmt(rec.lambda_mu) << ','
        << fmt(rec.lambda_sigma) << '\n';
  }
  if (!out) throw std::runtime_error("tune: write failed for " + out_path);

  ManifestBuilder mb("tune", seed);
  mb.cfg("p", p);
  mb.cfg("T", T);
  mb.cfg("replications", replications);
  mb.cfg("snr_list", snr_csv);
  mb.cfg("durations", durations_csv);
  mb.out(out_path);
  mb.write();
  return 0;
}

int run_angle_sweep(pw::Index p, pw::Index k, pw::Index weeks, pw::Index warmup, int replications,
                    const std::string& etas_csv, double amplitude, std::uint64_t seed,
                    const std::string& out_path) {
  pw::AngleSweepConfig config;
  config.p = p;
  config.k = k;
  config.weeks = weeks;
  config.warmup_len = warmup;
  config.replications = replications;
  config.etas = parse_double_list(etas_csv, "--etas");
  config.amplitude = amplitude;
  config.seed = seed;
  const auto rows = pw::angle_sweep_experiment(config);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("angle-sweep: cannot open " + out_path);
  out << "eta,mean_angle_rad,batch_angle_rad\n";
  for (const auto& row : rows)
    out << fmt(row.eta) << ',' << fmt(row.mean_angle_rad) << ',' << fmt(row.batch_angle_rad) << '\n';
  if (!out) throw std::runtime_error("angle-sweep: write failed for " + out_path);

  ManifestBuilder mb("angle-sweep", seed);
  mb.cfg("p", p);
  mb.cfg("k", k);
  mb.cfg("weeks", weeks);
  mb.cfg("warmup", warmup);
  mb.cfg("replications", static_cast<pw::Index>(replications));
  mb.cfg("etas", etas_csv);
  mb.cfg("amplitude", amplitude);
  mb.out(out_path);
  mb.write();
  return 0;
}

int run_phase(const std::string& p_csv, double beta, const std::string& r_csv, int trials,
              std::uint64_t seed, const std::string& rule_name, const std::string& out_path) {
  const auto p_list = parse_index_list(p_csv, "--p-list");
  const auto r_list = parse_double_list(r_csv, "--r-list");
  const pw::AlphaRule rule =
      rule_name == "log" ? pw::AlphaRule::kLogInverse : pw::AlphaRule::kLogSquaredInverse;
  const auto cells = pw::phase_transition_experiment(p_list, beta, r_list, trials, seed, rule);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("phase: cannot open " + out_path);
  out << "p,beta,r,rate\n";
  for (const auto& cell : cells)
    out << cell.p << ',' << fmt(cell.beta) << ',' << fmt(cell.r) << ',' << fmt(cell.exact_recovery_rate)
        << '\n';
  if (!out) throw std::runtime_error("phase: write failed for " + out_path);

  ManifestBuilder mb("phase", seed);
  mb.cfg("p_list", p_csv);
  mb.cfg("beta", beta);
  mb.cfg("r_list", r_csv);
  mb.cfg("trials", static_cast<pw::Index>(trials));
  mb.cfg("alpha_rule", rule_name);
  mb.out(out_path);
  mb.write();
  return 0;
}

int run_consistency(const std::string& kind, double phi, double hurst, const std::string& lambdas_csv,
                    pw::Index n, int reps, std::uint64_t seed, const std::string& out_path) {
  pw::CorrelationSpec corr;
  if (kind == "iid") corr.kind = pw::CorrelationSpec::Kind::kIid;
  else if (kind == "ar1") corr.kind = pw::CorrelationSpec::Kind::kAr1;
  else if (kind == "fgn") corr.kind = pw::CorrelationSpec::Kind::kFgn;
  else throw std::runtime_error("consistency: --kind must be iid, ar1, or fgn");
  corr.phi = phi;
  corr.hurst = hurst;

  const auto lambdas = parse_double_list(lambdas_csv, "--lambdas");
  const auto rows = pw::ewma_variance_consistency_experiment(corr, lambdas, n, reps, seed);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("consistency: cannot open " + out_path);
  out << "lambda,bias,variance\n";
  for (const auto& row : rows) out << fmt(row.lambda) << ',' << fmt(row.bias) << ',' << fmt(row.variance) << '\n';
  if (!out) throw std::runtime_error("consistency: write failed for " + out_path);

  ManifestBuilder mb("consistency", seed);
  mb.cfg("kind", kind);
  mb.cfg("phi", phi);
  mb.cfg("hurst", hurst);
  mb.cfg("lambdas", lambdas_csv);
  mb.cfg("n", n);
  mb.cfg("reps", static_cast<pw::Index>(reps));
  mb.out(out_path);
  mb.write();
  return 0;
}

int run_fidelity(const std::string& p_csv, pw::Index k, pw::Index n, double snr, std::uint64_t seed,
                 const std::string& out_path) {
  const auto p_list = parse_index_list(p_csv, "--p-list");
  const auto rows = pw::residual_fidelity_experiment(p_list, k, n, snr, seed);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("fidelity: cannot open " + out_path);
  out << "p,gap,bound\n";
  for (const auto& row : rows) out << row.p << ',' << fmt(row.mean_sq_gap) << ',' << fmt(row.bound) << '\n';
  if (!out) throw std::runtime_error("fidelity: write failed for " + out_path);

  ManifestBuilder mb("fidelity", seed);
  mb.cfg("p_list", p_csv);
  mb.cfg("k", k);
  mb.cfg("n", n);
  mb.cfg("snr", snr);
  mb.out(out_path);
  mb.write();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"portwatch: streaming sparse-anomaly watcher for high-dimensional telemetry"};
  app.require_subcommand(1);

  // generate ---------------------------------------------------------------
  auto* generate = app.add_subcommand("generate", "Synthesize a labeled dataset (data CSV + mask CSV)");
  pw::Index g_p = 100, g_T = 25200, g_k = 5, g_duration = 180, g_start = 15120, g_streams = 3,
            g_warmup = 10080;
  double g_hurst = 0.9, g_variance = 1.0, g_amplitude = 1.0, g_snr = 7.0;
  std::uint64_t g_seed = 1;
  std::string g_data_out, g_mask_out;
  generate->add_option("--p", g_p, "Stream count");
  generate->add_option("--T", g_T, "Total ticks");
  generate->add_option("--k", g_k, "Factor count (1..5)");
  generate->add_option("--hurst", g_hurst, "fGn Hurst index");
  generate->add_option("--variance", g_variance, "fGn marginal variance");
  generate->add_option("--amplitude", g_amplitude, "Trend amplitude");
  generate->add_option("--snr", g_snr, "Anomaly amplitude in warm-up sds");
  generate->add_option("--duration", g_duration, "Anomaly duration in ticks");
  generate->add_option("--start", g_start, "Anomaly start tick");
  generate->add_option("--streams", g_streams, "Anomalous stream count (first N)");
  generate->add_option("--warmup", g_warmup, "Warm-up ticks used to scale the anomaly");
  generate->add_option("--seed", g_seed, "Master seed");
  generate->add_option("--data-out", g_data_out, "Output data CSV")->required();
  generate->add_option("--mask-out", g_mask_out, "Output mask CSV")->required();

  // detect -----------------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "Run the streaming detector over a data CSV");
  std::string d_input, d_config, d_alerts_out, d_residuals_out, d_checkpoint;
  bool d_log = false;
  pw::Index d_top_k = -1;
  detect->add_option("--input", d_input, "Input data CSV")->required();
  detect->add_option("--config", d_config, "Detector config file (key = value)");
  detect->add_option("--alerts-out", d_alerts_out, "Output alerts CSV")->required();
  detect->add_option("--residuals-out", d_residuals_out, "Output residuals CSV");
  detect->add_option("--checkpoint", d_checkpoint,
                     "State file: restored when present, written after the run");
  detect->add_flag("--log-transform", d_log, "Apply ln(1+x) before detection");
  detect->add_option("--top-k", d_top_k, "Keep only the K busiest streams (raw sums)");

  // baseline-q -------------------------------------------------------------
  auto* baseline = app.add_subcommand("baseline-q", "Chi-square Q-statistic baseline");
  std::string b_input, b_out;
  double b_alpha = 0.05;
  pw::Index b_warmup = 10080, b_top_k = -1;
  bool b_log = false;
  baseline->add_option("--input", b_input, "Input data CSV")->required();
  baseline->add_option("--alpha", b_alpha, "Rejection level");
  baseline->add_option("--warmup", b_warmup, "Warm-up ticks for the covariance fit");
  baseline->add_option("--out", b_out, "Output CSV (tick,q_value,reject)")->required();
  baseline->add_flag("--log-transform", b_log, "Apply ln(1+x) first");
  baseline->add_option("--top-k", b_top_k, "Keep only the K busiest streams");

  // evaluate ---------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "Score alerts CSV(s) against a mask CSV");
  std::vector<std::string> e_alerts;
  std::string e_params, e_mask, e_report_out, e_roc_out;
  pw::Index e_test_start = 10080;
  evaluate->add_option("--alerts", e_alerts, "Alerts CSV (repeat for a parameter sweep)")->required();
  evaluate->add_option("--params", e_params, "Comma list of parameter values, one per --alerts");
  evaluate->add_option("--mask", e_mask, "Ground-truth mask CSV")->required();
  evaluate->add_option("--test-start", e_test_start, "First evaluated tick");
  evaluate->add_option("--report-out", e_report_out, "Report CSV")->required();
  evaluate->add_option("--roc-out", e_roc_out, "ROC CSV (param,fpr,tpr)");

  // tune -------------------------------------------------------------------
  auto* tune = app.add_subcommand("tune", "Grid-search tuner over (snr, duration) cells");
  pw::Index t_p = 100, t_T = 25200, t_reps = 5;
  std::uint64_t t_seed = 1;
  std::string t_snrs = "2,5,7", t_durations = "30,180", t_out;
  tune->add_option("--p", t_p, "Stream count");
  tune->add_option("--T", t_T, "Total ticks");
  tune->add_option("--replications", t_reps, "Replications per cell");
  tune->add_option("--seed", t_seed, "Master seed");
  tune->add_option("--snr-list", t_snrs, "Comma list of snr values");
  tune->add_option("--durations", t_durations, "Comma list of durations in ticks");
  tune->add_option("--out", t_out, "Output recommendations CSV")->required();

  // angle-sweep ------------------------------------------------------------
  auto* angles = app.add_subcommand("angle-sweep", "Subspace-tracking angle vs the Oja step size");
  pw::Index a_p = 100, a_k = 5, a_weeks = 10, a_warmup = 10080;
  int a_reps = 10;
  double a_amplitude = 3.0;
  std::uint64_t a_seed = 1;
  std::string a_etas = "1e-7,1e-6,1e-5,1e-4,1e-3,1e-2", a_out;
  angles->add_option("--p", a_p, "Stream count");
  angles->add_option("--k", a_k, "Factor count");
  angles->add_option("--weeks", a_weeks, "Stream length in weeks (5040 ticks each)");
  angles->add_option("--warmup", a_warmup, "Warm-up ticks");
  angles->add_option("--replications", a_reps, "Replications");
  angles->add_option("--etas", a_etas, "Comma list of eta values");
  angles->add_option("--amplitude", a_amplitude, "Trend amplitude");
  angles->add_option("--seed", a_seed, "Master seed");
  angles->add_option("--out", a_out, "Output CSV")->required();

  // phase ------------------------------------------------------------------
  auto* phase = app.add_subcommand("phase", "Exact-support-recovery phase experiment");
  std::string ph_p = "500,5000", ph_r = "0.5625,1.125,2.25,4.5,9", ph_rule = "log2", ph_out;
  double ph_beta = 0.75;
  int ph_trials = 200;
  std::uint64_t ph_seed = 1;
  phase->add_option("--p-list", ph_p, "Comma list of dimensions");
  phase->add_option("--beta", ph_beta, "Sparsity exponent");
  phase->add_option("--r-list", ph_r, "Comma list of amplitude exponents");
  phase->add_option("--trials", ph_trials, "Trials per cell");
  phase->add_option("--alpha-rule", ph_rule, "Threshold tail rule: log (1/ln p) or log2 (1/ln^2 p)")
      ->check(CLI::IsMember({"log", "log2"}));
  phase->add_option("--seed", ph_seed, "Master seed");
  phase->add_option("--out", ph_out, "Output CSV")->required();

  // consistency ------------------------------------------------------------
  auto* consistency = app.add_subcommand("consistency", "EWMA variance consistency experiment");
  std::string c_kind = "iid", c_lambdas = "1e-3,1e-4,1e-5", c_out;
  double c_phi = 0.5, c_hurst = 0.6;
  pw::Index c_n = 100000;
  int c_reps = 100;
  std::uint64_t c_seed = 1;
  consistency->add_option("--kind", c_kind, "Series type: iid, ar1, fgn")
      ->check(CLI::IsMember({"iid", "ar1", "fgn"}));
  consistency->add_option("--phi", c_phi, "AR(1) coefficient");
  consistency->add_option("--hurst", c_hurst, "fGn Hurst index (must be < 0.75)");
  consistency->add_option("--lambdas", c_lambdas, "Comma list of EWMA memories");
  consistency->add_option("--n", c_n, "Series length");
  consistency->add_option("--reps", c_reps, "Replications");
  consistency->add_option("--seed", c_seed, "Master seed");
  consistency->add_option("--out", c_out, "Output CSV")->required();

  // fidelity ---------------------------------------------------------------
  auto* fidelity = app.add_subcommand("fidelity", "Residual fidelity vs the plug-in bound");
  std::string f_p = "50,100,200", f_out;
  pw::Index f_k = 5, f_n = 10080;
  double f_snr = 7.0;
  std::uint64_t f_seed = 1;
  fidelity->add_option("--p-list", f_p, "Comma list of dimensions");
  fidelity->add_option("--k", f_k, "Factor count");
  fidelity->add_option("--n", f_n, "Anomaly-free fit samples");
  fidelity->add_option("--snr", f_snr, "Anomaly amplitude in warm-up sds");
  fidelity->add_option("--seed", f_seed, "Master seed");
  fidelity->add_option("--out", f_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // --help exits 0; any parse failure is a usage error
  }

  try {
    if (generate->parsed()) {
      return run_generate(g_p, g_T, g_k, g_hurst, g_variance, g_amplitude, g_snr, g_duration, g_start,
                          g_streams, g_warmup, g_seed, resolve_out(g_data_out), resolve_out(g_mask_out));
    }
    if (detect->parsed()) {
      return run_detect(d_input, d_config, resolve_out(d_alerts_out), resolve_out(d_residuals_out),
                        d_checkpoint, d_log, d_top_k);
    }
    if (baseline->parsed()) {
      return run_baseline_q(b_input, b_alpha, b_warmup, resolve_out(b_out), b_log, b_top_k);
    }
    if (evaluate->parsed()) {
      return run_evaluate(e_alerts, e_params, e_mask, e_test_start, resolve_out(e_report_out),
                          resolve_out(e_roc_out));
    }
    if (tune->parsed()) {
      return run_tune(t_p, t_T, t_reps, t_seed, t_snrs, t_durations, resolve_out(t_out));
    }
    if (angles->parsed()) {
      return run_angle_sweep(a_p, a_k, a_weeks, a_warmup, a_reps, a_etas, a_amplitude, a_seed,
                             resolve_out(a_out));
    }
    if (phase->parsed()) {
      return run_phase(ph_p, ph_beta, ph_r, ph_trials, ph_seed, ph_rule, resolve_out(ph_out));
    }
    if (consistency->parsed()) {
      return run_consistency(c_kind, c_phi, c_hurst, c_lambdas, c_n, c_reps, c_seed, resolve_out(c_out));
    }
    if (fidelity->parsed()) {
      return run_fidelity(f_p, f_k, f_n, f_snr, f_seed, resolve_out(f_out));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
