#pragma once

#include <cstdint>
#include <vector>

#include "portwatch/metrics.hpp"
#include "portwatch/types.hpp"

namespace portwatch {

// Subspace-tracking accuracy versus the Oja step size: mean (over
// replications) largest principal angle between the tracked basis and the
// true loading span after streaming `weeks` of anomaly-free data, plus the
// full-sample batch reference.
struct AngleSweepConfig {
  Index p = 100;
  Index k = 5;
  Index weeks = 10;            // 5040 ticks per week
  Index warmup_len = 10080;
  std::vector<double> etas = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  int replications = 10;
  double lambda = 1e-4;        // data-mean EWMA during streaming
  double var_fraction = 0.9;
  double amplitude = 3.0;
  std::uint64_t seed = 1;
};

struct AngleSweepRow {
  double eta = 0.0;
  double mean_angle_rad = 0.0;   // streaming estimate vs true span
  double batch_angle_rad = 0.0;  // full-sample batch PCA vs true span (same all rows)
};

std::vector<AngleSweepRow> angle_sweep_experiment(const AngleSweepConfig& config);

// Control-limit sweep for the detector ROC: log-spaced anchors below 1 for
// the permissive corner, 0.1 steps through [1, 5] where a weak-anomaly curve
// bends, then a sparse strict tail.  A coarse grid would chord-under-integrate
// the concave mid-band while the baseline enjoys a dense alpha sweep.
std::vector<double> default_roc_control_limits();

// Detector-vs-Q-statistic ROC on sparse anomalies: support size
// floor(p^(1-beta)) on the first streams of the default preset.  The
// detector curve sweeps the control limit; the baseline curve sweeps alpha.
// Points are averaged across seeds before integration.
struct RocComparisonConfig {
  Index p = 100;
  double beta = 0.75;
  double snr = 2.0;
  Index duration_ticks = 180;
  Index T = 25200;
  Index warmup_len = 10080;
  Index start_tick = 15120;
  int seeds = 5;
  std::uint64_t master_seed = 1;
  std::vector<double> control_limits = default_roc_control_limits();
  int alpha_points = 40;  // logit-spaced alpha sweep for the baseline
  // Subspace dimension for the detector branch: -1 applies the warm-up
  // variance-fraction rule, >= 0 pins the dimension.
  Index forced_k = -1;
};

struct RocComparisonResult {
  RocCurve detector;
  RocCurve baseline;
  double auc_gap = 0.0;  // detector.auc - baseline.auc
};

RocComparisonResult roc_comparison_experiment(const RocComparisonConfig& config);

}  // namespace portwatch
