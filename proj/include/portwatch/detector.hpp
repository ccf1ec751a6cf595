#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "portwatch/subspace.hpp"
#include "portwatch/types.hpp"

namespace portwatch {

struct DetectorConfig {
  double lambda = 1e-4;        // EWMA memory for the data mean
  double lambda_mu = 1e-2;     // EWMA memory for the residual mean
  double lambda_sigma = 1e-4;  // EWMA memory for the residual variance
  double eta = 1e-5;           // iPCA forget factor
  double control_limit = 7.0;  // L
  double reg_guard = 3.0;      // R
  double var_fraction = 0.9;   // pi, batch-PCA retained variance
  Index warmup_len = 10080;    // n0

  // Throws std::invalid_argument on range violations; warns (stderr, once per
  // process) when reg_guard <= control_limit, which would freeze the variance
  // tracker before any alert can fire.
  void validate() const;
};

// sigma2_r is strictly positive: floored at kVarianceFloor during warm-up and
// closed under the EWMA recursion afterwards.
inline constexpr double kVarianceFloor = 1e-12;

struct DetectorState {
  Vector<double> nu_x;
  Vector<double> nu_r;
  Vector<double> sigma2_r;
  SubspaceEstimate subspace;
  std::vector<Index> last_alerts;  // sorted, unique
  Index tick = 0;

  Index p() const { return nu_x.size(); }
};

struct AlertRecord {
  Index tick = 0;
  Index stream = 0;
  double residual = 0.0;
  double centered_abs = 0.0;
  double threshold = 0.0;
};

struct AlertMatrix {
  std::vector<AlertRecord> records;
  Index p = 0;
  Index T = 0;
};

template <typename Scalar>
Scalar ewma(Scalar old_value, Scalar observation, Scalar memory) {
  return (Scalar{1} - memory) * old_value + memory * observation;
}

// Batch warm-up: subspace from batch_pca at var_fraction, nu_x = warm-up
// mean, (nu_r, sigma2_r) = per-stream mean/variance of the warm-up residuals,
// variance floored at kVarianceFloor (with a warning naming the number of
// floored streams).  forced_k >= 0 bypasses the variance-fraction rule.
DetectorState init_from_warmup(const Eigen::Ref<const Matrix<double>>& x_warmup, const DetectorConfig& config,
                               Index forced_k = -1);

// One tick of the streaming recursion, in order: (1) data-mean EWMA for all
// streams not alerted on the previous tick; (2) residual through the current
// subspace; (3) Oja subspace update; (4) residual-mean EWMA where
// |r| < R * sigma_r; (5) residual-variance EWMA where |r - nu_r| < R *
// sigma_r (pre-update sigma_r); (6) alert where |r - nu_r| > L * sigma_r
// (post-update values).  Mutates state in place and returns (residual,
// alerts).  A non-finite coordinate in x throws std::domain_error and leaves
// the state untouched.
struct StepResult {
  Vector<double> residual;
  std::vector<Index> alerts;
};
StepResult step(DetectorState& state, const Eigen::Ref<const Vector<double>>& x, const DetectorConfig& config);

// Warm-up on the first n0 columns, then step across the rest.  Non-finite
// ticks are skipped and reported (the statistical state is untouched, but the
// clock advances so later records stay aligned with column indices); their
// residual columns are NaN.
struct RunResult {
  AlertMatrix alerts;
  Matrix<double> residuals;           // p x (T - n0)
  std::vector<Index> skipped_ticks;
};
RunResult run_stream(const Eigen::Ref<const Matrix<double>>& x, const DetectorConfig& config,
                     Index forced_k = -1);

// Same recursion, but starting from a prepared state and accumulating
// confusion counts against a ground-truth mask instead of materializing
// records; used by the tuner's grid, where storing per-run alert lists would
// dominate the cost.  Counts agree exactly with run_stream + evalkit on the
// same inputs (tested).
struct StreamCounts {
  long rows_tp = 0, rows_fp = 0, rows_tn = 0, rows_fn = 0;
  long indiv_tp = 0, indiv_fp = 0, indiv_tn = 0, indiv_fn = 0;
};
StreamCounts run_counts(DetectorState state, const Eigen::Ref<const Matrix<double>>& x,
                        const Eigen::Ref<const BoolMatrix>& mask, const DetectorConfig& config,
                        Index start_tick);

// Flat `key = value` config file covering exactly the DetectorConfig fields;
// '#' starts a comment.  Unknown keys are errors.
DetectorConfig parse_detector_config(const std::string& path);

// Checkpoint layout (text, one value per line, doubles at round-trip
// precision): p, k, nu_x, nu_r, sigma2_r, basis column-major, tick.  The
// layout carries no alert set and no eigenvalue estimates; restore resumes
// with an empty last_alerts and zeroed eigenvalues.
void save_checkpoint(const std::string& path, const DetectorState& state);
DetectorState load_checkpoint(const std::string& path);

}  // namespace portwatch
