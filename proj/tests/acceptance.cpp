// Release gate: one test case per acceptance criterion, each printing a
// single [PASS]/[FAIL] line.  The CTest registration keys on those lines, so
// every case funnels its sub-conditions into one boolean before reporting.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <Eigen/Dense>

#include "portwatch/csv.hpp"
#include "portwatch/detector.hpp"
#include "portwatch/experiments.hpp"
#include "portwatch/factor_model.hpp"
#include "portwatch/ingest.hpp"
#include "portwatch/metrics.hpp"
#include "portwatch/qstat.hpp"
#include "portwatch/rng.hpp"
#include "portwatch/special.hpp"
#include "portwatch/subspace.hpp"
#include "portwatch/synth.hpp"
#include "portwatch/theory.hpp"
#include "portwatch/tuner.hpp"

namespace pw = portwatch;

namespace {

void report(int number, const std::string& name, bool ok, const std::string& details) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << name;
  if (!details.empty()) std::cout << "  [" << details << "]";
  std::cout << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

pw::Matrix<double> random_orthonormal(pw::Index p, pw::Index k, std::uint64_t seed) {
  pw::GaussianStream rng(seed);
  pw::Matrix<double> basis(p, k);
  for (pw::Index j = 0; j < k; ++j)
    for (pw::Index i = 0; i < p; ++i) basis(i, j) = rng.next();
  pw::orthonormalize_columns(basis);
  return basis;
}

}  // namespace

TEST_SUITE("acceptance") {

TEST_CASE("criterion 1: detection rates at reference control limits") {
  const auto t0 = std::chrono::steady_clock::now();

  pw::DetectorConfig base;  // lambda 1e-4, lambda_mu 1e-2, lambda_sigma 1e-4 are the defaults
  base.reg_guard = 3.0;
  const std::vector<double> limits = {5.0, 7.0, 20.0};
  const int n_seeds = 5;

  std::vector<double> tpr_rows(limits.size(), 0.0), fpr_rows(limits.size(), 0.0);
  std::vector<double> tpr_indiv(limits.size(), 0.0), fpr_indiv(limits.size(), 0.0);
  for (int s = 0; s < n_seeds; ++s) {
    const std::uint64_t seed = pw::derive_seed(1, 0xacc1ULL, static_cast<std::uint64_t>(s));
    const pw::FactorModel model = pw::default_factor_model(100, 5, seed);
    const pw::AnomalySpec anomaly;  // snr 7, 180 ticks starting at 15120, streams {0,1,2}
    const pw::LabeledDataset ds = pw::synthesize_dataset(model, anomaly, 25200, seed, base.warmup_len);
    // Subspace pinned to the preset's five trends (the seasonal block sits on
    // the noise scale, so the variance-fraction rule would not isolate it).
    const pw::DetectorState init = pw::init_from_warmup(ds.data.leftCols(base.warmup_len), base, 5);
    for (std::size_t li = 0; li < limits.size(); ++li) {
      pw::DetectorConfig cfg = base;
      cfg.control_limit = limits[li];
      const pw::StreamCounts counts = pw::run_counts(init, ds.data, ds.mask.cells, cfg, base.warmup_len);
      const pw::EvalReport rep = pw::report_from_counts(counts);
      tpr_rows[li] += rep.tpr_rows / n_seeds;
      fpr_rows[li] += rep.fpr_rows / n_seeds;
      tpr_indiv[li] += rep.tpr_indiv / n_seeds;
      fpr_indiv[li] += rep.fpr_indiv / n_seeds;
    }
  }
  const double elapsed = seconds_since(t0);

  const bool l5_ok = tpr_rows[0] >= 0.95 && fpr_rows[0] <= 0.05;
  const bool l7_ok = tpr_indiv[1] >= 0.75 && tpr_indiv[1] <= 0.97 && fpr_indiv[1] <= 0.01;
  const bool l20_ok = tpr_rows[2] <= 0.25;
  const bool time_ok = elapsed < 300.0;
  CHECK(l5_ok);
  CHECK(l7_ok);
  CHECK(l20_ok);
  CHECK(time_ok);

  std::ostringstream d;
  d << "L=5 rows tpr=" << tpr_rows[0] << " fpr=" << fpr_rows[0] << "; L=7 indiv tpr=" << tpr_indiv[1]
    << " fpr=" << fpr_indiv[1] << "; L=20 rows tpr=" << tpr_rows[2] << "; " << elapsed << "s";
  report(1, "detection rates at reference control limits", l5_ok && l7_ok && l20_ok && time_ok, d.str());
}

TEST_CASE("criterion 2: subspace tracking angle has interior optimum in eta") {
  const pw::AngleSweepConfig config;  // 6 decades of eta, 10 replications, 10 weeks
  const auto rows = pw::angle_sweep_experiment(config);
  REQUIRE(rows.size() == config.etas.size());

  std::size_t argmin = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].mean_angle_rad < rows[argmin].mean_angle_rad) argmin = i;

  const bool interior = argmin > 0 && argmin + 1 < rows.size();
  const bool batch_no_worse = rows.front().batch_angle_rad <= rows[argmin].mean_angle_rad;
  const double eta_star = rows[argmin].eta;
  const bool within_decade = eta_star >= 1e-6 && eta_star <= 1e-4;
  CHECK(interior);
  CHECK(batch_no_worse);
  CHECK(within_decade);

  std::ostringstream d;
  d << "argmin eta=" << eta_star << " angle=" << rows[argmin].mean_angle_rad
    << " rad; batch=" << rows.front().batch_angle_rad << " rad";
  report(2, "subspace tracking angle has interior optimum in eta", interior && batch_no_worse && within_decade,
         d.str());
}

TEST_CASE("criterion 3: detector beats chi-square baseline with growing gap") {
  pw::RocComparisonConfig small;  // p = 100, beta 0.75, snr 2, 6 h, 5 seeds
  // Subspace pinned to the preset's five trends for the detector branch; the
  // variance-fraction rule on this unit-amplitude preset would keep dozens of
  // sample-noise directions and cost the detector ~0.15 AUC here.
  small.forced_k = 5;
  const pw::RocComparisonResult at100 = pw::roc_comparison_experiment(small);
  pw::RocComparisonConfig large = small;
  large.p = 500;
  const pw::RocComparisonResult at500 = pw::roc_comparison_experiment(large);

  const bool positive = at100.auc_gap > 0.0;
  const bool grows = at500.auc_gap > at100.auc_gap;
  CHECK(positive);
  CHECK(grows);

  std::ostringstream d;
  d << "gap(100)=" << at100.auc_gap << " gap(500)=" << at500.auc_gap << "; detector auc " << at100.detector.auc
    << "/" << at500.detector.auc << " baseline auc " << at100.baseline.auc << "/" << at500.baseline.auc;
  report(3, "detector beats chi-square baseline with growing gap", positive && grows, d.str());
}

TEST_CASE("criterion 4: sparse support recovery phase transition") {
  const std::vector<double> r_list = {0.5625, 1.125, 2.25, 4.5, 9.0};
  const int n_trials = 200;
  const auto cells = pw::phase_transition_experiment({5000}, 0.75, r_list, n_trials, 20260815ULL);
  REQUIRE(cells.size() == r_list.size());

  const double rate_lo = cells.front().exact_recovery_rate;
  const double rate_hi = cells.back().exact_recovery_rate;
  const bool ends_ok = rate_hi >= 0.95 && rate_lo <= 0.05;
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const double p1 = cells[i].exact_recovery_rate;
    const double p2 = cells[i + 1].exact_recovery_rate;
    const double se = std::sqrt((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / n_trials + 1e-12);
    if (p2 < p1 - 2.0 * se) monotone = false;
  }
  CHECK(ends_ok);
  CHECK(monotone);

  std::ostringstream d;
  d << "rates";
  for (const auto& cell : cells) d << " " << cell.exact_recovery_rate;
  d << " at r" ;
  for (const double r : r_list) d << " " << r;
  report(4, "sparse support recovery phase transition", ends_ok && monotone, d.str());
}

TEST_CASE("criterion 5: ewma variance estimator consistency") {
  const std::vector<double> lambdas = {1e-3, 1e-4, 1e-5};
  const pw::Index n = 100000;
  const int reps = 100;

  bool all_ok = true;
  std::ostringstream d;
  const std::vector<std::pair<std::string, pw::CorrelationSpec>> specs = {
      {"iid", {pw::CorrelationSpec::Kind::kIid, 0.0, 0.5}},
      {"ar1(0.5)", {pw::CorrelationSpec::Kind::kAr1, 0.5, 0.5}},
  };
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const auto rows =
        pw::ewma_variance_consistency_experiment(specs[si].second, lambdas, n, reps, 42 + si);
    REQUIRE(rows.size() == 3);
    const bool bias_ok = std::abs(rows[1].bias) < 0.02;  // lambda = 1e-4
    const bool var_ordered = rows[0].variance > rows[2].variance;
    CHECK(bias_ok);
    CHECK(var_ordered);
    all_ok = all_ok && bias_ok && var_ordered;
    if (si > 0) d << "; ";
    d << specs[si].first << " bias(1e-4)=" << rows[1].bias << " var(1e-3)=" << rows[0].variance
      << " var(1e-5)=" << rows[2].variance;
  }
  report(5, "ewma variance estimator consistency", all_ok, d.str());
}

TEST_CASE("criterion 6: chi-square baseline null calibration") {
  // Calibration is checked under the statistic's own null: ticks drawn iid
  // from one fixed correlated Gaussian.  (The seasonal synthetic preset is
  // deliberately *not* that null -- the model mismatch there is what the
  // detector-vs-baseline comparison exploits.)
  const pw::Index p = 20;
  const pw::Index warmup = 10080;
  const pw::Index null_ticks = 10000;
  pw::GaussianStream rng(6);
  pw::Matrix<double> mix(p, p);
  for (pw::Index c = 0; c < p; ++c)
    for (pw::Index r = 0; r < p; ++r) mix(r, c) = rng.next() / std::sqrt(static_cast<double>(p));
  mix += 0.7 * pw::Matrix<double>::Identity(p, p);
  pw::Vector<double> mu(p);
  for (pw::Index r = 0; r < p; ++r) mu(r) = rng.next();
  pw::Matrix<double> x(p, warmup + null_ticks);
  pw::Vector<double> z(p);
  for (pw::Index t = 0; t < x.cols(); ++t) {
    for (pw::Index r = 0; r < p; ++r) z(r) = rng.next();
    x.col(t) = mu + mix * z;
  }
  const pw::QDetector q = pw::fit_q_detector(x.leftCols(warmup), 0.05);
  const std::vector<bool> rejects = pw::q_detect_stream(x, q, warmup);
  REQUIRE(static_cast<pw::Index>(rejects.size()) == null_ticks);
  double rate = 0.0;
  for (const bool r : rejects) rate += r ? 1.0 : 0.0;
  rate /= static_cast<double>(null_ticks);
  const bool calibrated = rate >= 0.04 && rate <= 0.06;
  CHECK(calibrated);

  // Closed forms at dof 1 and 2, relative error under 1e-6 across the range.
  bool closed_forms = true;
  double worst = 0.0;
  for (double prob = 0.05; prob < 0.999; prob += 0.015) {
    const double two = -2.0 * std::log1p(-prob);
    const double z = pw::normal_quantile((1.0 + prob) / 2.0);
    const double one = z * z;
    const double rel2 = std::abs(pw::chi2_quantile(2, prob) - two) / two;
    const double rel1 = std::abs(pw::chi2_quantile(1, prob) - one) / one;
    worst = std::max({worst, rel1, rel2});
    if (rel1 > 1e-6 || rel2 > 1e-6) closed_forms = false;
  }
  CHECK(closed_forms);

  std::ostringstream d;
  d << "null reject rate=" << rate << "; worst closed-form rel err=" << worst;
  report(6, "chi-square baseline null calibration", calibrated && closed_forms, d.str());
}

TEST_CASE("criterion 7: subspace perturbation bound holds empirically") {
  const pw::Index p = 20, k = 3;
  int held = 0;
  const int n_instances = 100;
  for (int i = 0; i < n_instances; ++i) {
    const std::uint64_t seed = pw::derive_seed(7, 0xd4bdULL, static_cast<std::uint64_t>(i));
    pw::GaussianStream rng(seed);
    const pw::Matrix<double> q = random_orthonormal(p, k, pw::derive_seed(seed, 1));

    pw::Vector<double> evals(k);
    evals << 3.0 + rng.next_uniform(), 2.0 + rng.next_uniform(), 1.0 + rng.next_uniform();
    pw::CovarianceEstimate reference{q * evals.asDiagonal() * q.transpose(), 1000};

    pw::Matrix<double> noise(p, p);
    for (pw::Index c = 0; c < p; ++c)
      for (pw::Index r = 0; r < p; ++r) noise(r, c) = rng.next();
    pw::Matrix<double> perturb = 0.5 * (noise + noise.transpose());
    const double scale = (0.01 + 0.09 * rng.next_uniform()) * evals(k - 1) / perturb.operatorNorm();
    perturb *= scale;
    pw::CovarianceEstimate estimated{reference.matrix + perturb, 1000};

    if (pw::davis_kahan_bound(estimated, reference, k).holds) ++held;
  }
  const bool all_held = held == n_instances;
  CHECK(all_held);

  std::ostringstream d;
  d << held << "/" << n_instances << " instances";
  report(7, "subspace perturbation bound holds empirically", all_held, d.str());
}

TEST_CASE("criterion 8: invariant property suites") {
  const int n_cases = 100;
  std::ostringstream d;

  // Projection idempotence and orthogonality to the basis.
  int proj_ok = 0;
  for (int i = 0; i < n_cases; ++i) {
    pw::GaussianStream rng(pw::derive_seed(81, static_cast<std::uint64_t>(i)));
    const pw::Index p = 2 + static_cast<pw::Index>(rng.next_below(29));
    const pw::Index k = static_cast<pw::Index>(rng.next_below(static_cast<std::uint64_t>(std::min<pw::Index>(p, 7))));
    pw::SubspaceEstimate est;
    est.basis = k > 0 ? random_orthonormal(p, k, pw::derive_seed(81, static_cast<std::uint64_t>(i), 1))
                      : pw::Matrix<double>(p, 0);
    est.eigenvalues = pw::Vector<double>::Zero(k);
    pw::Vector<double> x(p), mean(p);
    for (pw::Index j = 0; j < p; ++j) {
      x(j) = 100.0 * rng.next();
      mean(j) = rng.next();
    }
    const pw::Vector<double> r = pw::project_residual(x, mean, est);
    const pw::Vector<double> r2 = pw::project_residual(r + mean, mean, est);
    const double scale = std::max(1.0, x.norm());
    const bool idempotent = (r2 - r).norm() <= 1e-9 * scale;
    const bool orthogonal = k == 0 || (est.basis.transpose() * r).norm() <= 1e-9 * scale;
    if (idempotent && orthogonal) ++proj_ok;
  }

  // Residual-variance positivity under shock-laden streams and random configs.
  int var_ok = 0;
  for (int i = 0; i < n_cases; ++i) {
    pw::GaussianStream rng(pw::derive_seed(82, static_cast<std::uint64_t>(i)));
    pw::DetectorConfig cfg;
    cfg.lambda_sigma = std::pow(10.0, -2.0 - 2.0 * rng.next_uniform());
    cfg.lambda_mu = std::pow(10.0, -1.0 - 2.0 * rng.next_uniform());
    cfg.control_limit = 0.5 + 6.0 * rng.next_uniform();
    cfg.reg_guard = 8.0;  // keep updates live so the recursion actually runs
    cfg.warmup_len = 64;
    const pw::Index p = 3;
    pw::Matrix<double> warm(p, cfg.warmup_len);
    for (pw::Index c = 0; c < cfg.warmup_len; ++c)
      for (pw::Index r = 0; r < p; ++r) warm(r, c) = rng.next();
    pw::DetectorState state = pw::init_from_warmup(warm, cfg, 1);
    bool positive = true;
    for (int t = 0; t < 50; ++t) {
      pw::Vector<double> x(p);
      const double boost = (t % 7 == 0) ? 1e3 : 1.0;
      for (pw::Index r = 0; r < p; ++r) x(r) = boost * rng.next();
      pw::step(state, x, cfg);
      if (!(state.sigma2_r.array() > 0.0).all()) positive = false;
    }
    if (positive) ++var_ok;
  }

  // Bit-exact determinism of the full streaming run.
  int det_ok = 0;
  for (int i = 0; i < n_cases; ++i) {
    pw::GaussianStream rng(pw::derive_seed(83, static_cast<std::uint64_t>(i)));
    pw::DetectorConfig cfg;
    cfg.warmup_len = 30;
    cfg.control_limit = 2.0;
    pw::Matrix<double> x(4, 60);
    for (pw::Index c = 0; c < x.cols(); ++c)
      for (pw::Index r = 0; r < x.rows(); ++r) x(r, c) = rng.next();
    const pw::RunResult a = pw::run_stream(x, cfg, 2);
    const pw::RunResult b = pw::run_stream(x, cfg, 2);
    bool same = a.residuals.rows() == b.residuals.rows() &&
                std::memcmp(a.residuals.data(), b.residuals.data(),
                            sizeof(double) * static_cast<std::size_t>(a.residuals.size())) == 0 &&
                a.alerts.records.size() == b.alerts.records.size();
    for (std::size_t j = 0; same && j < a.alerts.records.size(); ++j)
      same = a.alerts.records[j].tick == b.alerts.records[j].tick &&
             a.alerts.records[j].stream == b.alerts.records[j].stream &&
             a.alerts.records[j].residual == b.alerts.records[j].residual;
    if (same) ++det_ok;
  }

  // CSV round trip is bit-exact across the double range.
  int csv_ok = 0;
  const std::filesystem::path scratch =
      std::filesystem::temp_directory_path() / "portwatch_acceptance_roundtrip.csv";
  for (int i = 0; i < n_cases; ++i) {
    pw::GaussianStream rng(pw::derive_seed(84, static_cast<std::uint64_t>(i)));
    const pw::Index rows = 1 + static_cast<pw::Index>(rng.next_below(6));
    const pw::Index cols = 1 + static_cast<pw::Index>(rng.next_below(9));
    pw::Matrix<double> m(rows, cols);
    for (pw::Index c = 0; c < cols; ++c)
      for (pw::Index r = 0; r < rows; ++r) {
        const double mag = std::pow(10.0, 300.0 * (2.0 * rng.next_uniform() - 1.0));
        m(r, c) = (rng.next_below(2) == 0 ? -1.0 : 1.0) * mag * (0.5 + rng.next_uniform());
      }
    pw::write_series_csv(scratch.string(), m);
    const pw::LoadedSeries back = pw::load_timeseries_csv(scratch.string(), {});
    if (back.data.rows() == rows && back.data.cols() == cols &&
        std::memcmp(back.data.data(), m.data(), sizeof(double) * static_cast<std::size_t>(m.size())) == 0)
      ++csv_ok;
  }
  std::filesystem::remove(scratch);

  // Curve area is invariant under permutations of the input points.
  int auc_ok = 0;
  std::mt19937 shuffler(4242);
  for (int i = 0; i < n_cases; ++i) {
    pw::GaussianStream rng(pw::derive_seed(85, static_cast<std::uint64_t>(i)));
    const std::size_t n = 1 + rng.next_below(20);
    std::vector<std::pair<double, double>> points(n);
    for (auto& pt : points) pt = {rng.next_uniform(), rng.next_uniform()};
    auto shuffled = points;
    std::shuffle(shuffled.begin(), shuffled.end(), shuffler);
    if (pw::roc_auc(points).auc == pw::roc_auc(shuffled).auc) ++auc_ok;
  }

  const bool all_ok = proj_ok == n_cases && var_ok == n_cases && det_ok == n_cases && csv_ok == n_cases &&
                      auc_ok == n_cases;
  CHECK(proj_ok == n_cases);
  CHECK(var_ok == n_cases);
  CHECK(det_ok == n_cases);
  CHECK(csv_ok == n_cases);
  CHECK(auc_ok == n_cases);

  d << "projection " << proj_ok << "/100, variance positivity " << var_ok << "/100, determinism " << det_ok
    << "/100, csv " << csv_ok << "/100, auc " << auc_ok << "/100";
  report(8, "invariant property suites", all_ok, d.str());
}

TEST_CASE("criterion 9: tuner recommendations match reference operating points") {
  const std::vector<pw::TuningCellSpec> cells = {{2.0, 30}, {7.0, 180}};
  const pw::TuningGrids grids;
  const pw::DetectorConfig base;
  const auto recs = pw::grid_search_tune(cells, 100, 25200, 5, 1, grids, base);
  REQUIRE(recs.size() == 2);

  // "Within one grid cell": the recommendation may land on the reference
  // value or either neighbour along the L and R axes.
  const auto within_one = [](const std::vector<double>& grid, double value, double reference) {
    const auto ref_it = std::find(grid.begin(), grid.end(), reference);
    REQUIRE(ref_it != grid.end());
    const auto idx = static_cast<std::size_t>(ref_it - grid.begin());
    for (std::size_t j = (idx == 0 ? 0 : idx - 1); j < grid.size() && j <= idx + 1; ++j)
      if (grid[j] == value) return true;
    return false;
  };

  const bool cell1_ok = within_one(grids.control_limit, recs[0].control_limit, 5.0) &&
                        within_one(grids.reg_guard, recs[0].reg_guard, 4.0);
  const bool cell2_ok = within_one(grids.control_limit, recs[1].control_limit, 7.0) &&
                        within_one(grids.reg_guard, recs[1].reg_guard, 3.0);
  CHECK(cell1_ok);
  CHECK(cell2_ok);

  std::ostringstream d;
  d << "snr 2/1h -> L=" << recs[0].control_limit << " R=" << recs[0].reg_guard << " (ref 5/4); snr 7/6h -> L="
    << recs[1].control_limit << " R=" << recs[1].reg_guard << " (ref 7/3)";
  report(9, "tuner recommendations match reference operating points", cell1_ok && cell2_ok, d.str());
}

}  // TEST_SUITE
