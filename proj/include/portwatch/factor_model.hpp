#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "portwatch/fgn.hpp"
#include "portwatch/types.hpp"

namespace portwatch {

// One deterministic seasonal factor: amplitude * sin(2*pi*t/period + phase).
// Periods are in ticks (one tick = one sampling interval; the default preset
// assumes 2-minute sampling, so a day is 720 ticks).
struct TrendSpec {
  Index period = 720;
  double amplitude = 1.0;
  double phase_offset = 0.0;

  void validate() const;
};

// x_t = loadings * f_t + fGn noise; loadings is p x k binary with a leading
// all-ones column (a shared level factor).
struct FactorModel {
  Matrix<double> loadings;
  std::vector<TrendSpec> trends;
  NoiseSpec noise;

  Index p() const { return loadings.rows(); }
  Index k() const { return loadings.cols(); }
  void validate() const;
};

// Binary loading matrix: column 0 is all ones; column j (0-based, j >= 1)
// carries floor((1 - j/k) * p) ones at uniformly random distinct rows.
// Retries the random columns (bounded) until the matrix has full column
// rank; throws if that fails.
Matrix<double> build_factor_matrix(Index p, Index k, std::uint64_t seed);

// k x T matrix of factor values; row j is trends[j] evaluated at t = 0..T-1.
Matrix<double> generate_trends(const std::vector<TrendSpec>& trends, Index T);

// (lambda_min(B^T B), max_ij |B_ij|) -- the incoherence ingredients used by
// the residual-fidelity bound.
std::pair<double, double> incoherence_check(const Matrix<double>& loadings);

// Seasonal periods of the default synthetic preset, in ticks at 2-minute
// sampling: two diurnal, one weekly, a 6-hour and a 4.8-hour harmonic.
std::vector<Index> default_trend_periods();

// Default synthetic preset: binary loadings via build_factor_matrix, the five
// default periods with uniform random phases, fGn(H, sigma2) noise.  The
// amplitude default (1.0) keeps seasonal swings on the noise scale, so a
// snr-7 level shift lands roughly 7-14 residual sigmas above the detection
// floor -- heterogeneous across streams because the two diurnal trends share
// a period and their random phases interfere.  Note the seasonal block then
// carries only ~60% of total variance: subspace benchmarks on this preset
// should pin k to the trend count rather than rely on a variance-fraction
// rule (which would absorb dozens of noise directions).
FactorModel default_factor_model(Index p, Index k, std::uint64_t seed, double amplitude = 1.0,
                                 double hurst = 0.9, double noise_variance = 1.0);

}  // namespace portwatch
