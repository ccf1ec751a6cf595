#pragma once

#include <cstdint>
#include <vector>

#include "portwatch/detector.hpp"
#include "portwatch/metrics.hpp"
#include "portwatch/synth.hpp"

namespace portwatch {

// Search grids for the detector hyper-parameters.  L is swept inside each
// combo to build the ROC; the remaining four axes form the product grid.
struct TuningGrids {
  std::vector<double> lambda = {1e-2, 1e-3, 1e-4};
  std::vector<double> lambda_mu = {1e-2, 1e-3, 1e-4};
  std::vector<double> lambda_sigma = {1e-4, 1e-5, 1e-6};
  std::vector<double> control_limit = {0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 20.0};
  std::vector<double> reg_guard = {3.0, 4.0, 5.0};
};

struct TuningRecommendation {
  double snr = 0.0;
  double duration_hours = 0.0;
  double control_limit = 0.0;  // L
  double reg_guard = 0.0;      // R
  double lambda = 0.0;
  double lambda_mu = 0.0;
  double lambda_sigma = 0.0;
  double auc = 0.0;  // of the winning combo's L-sweep
  double f1 = 0.0;   // indiv-level, at the winning L
};

// One (snr, duration) cell: every replication shares the warm-up fit (the
// grid does not touch var_fraction or eta), each (lambda, lambda_mu,
// lambda_sigma, R) combo re-runs the detector per L (alert feedback forbids
// trajectory reuse), rows-level rates averaged across replications give the
// L-sweep ROC, argmax AUC picks the combo, argmax averaged indiv F1 picks L.
// Ties: smaller lambda, then lambda_mu, lambda_sigma, R; smaller L.
// forced_k >= 0 pins the warm-up subspace dimension (synthetic benchmarks
// know the trend count); the default keeps the variance-fraction rule.
TuningRecommendation tune_cell(const std::vector<LabeledDataset>& replications, const TuningGrids& grids,
                               const DetectorConfig& base, Index forced_k = -1);

// Full Table-I-shaped sweep: one recommendation per (snr, duration) cell.
// Datasets are synthesized per cell from the default preset; the warm-up
// subspace is pinned to that preset's five trends.
struct TuningCellSpec {
  double snr = 0.0;
  Index duration_ticks = 0;
};
std::vector<TuningRecommendation> grid_search_tune(const std::vector<TuningCellSpec>& cells, Index p, Index T,
                                                   Index replications, std::uint64_t seed,
                                                   const TuningGrids& grids, const DetectorConfig& base);

}  // namespace portwatch
