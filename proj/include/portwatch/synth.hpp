#pragma once

#include <cstdint>
#include <vector>

#include "portwatch/factor_model.hpp"
#include "portwatch/types.hpp"

namespace portwatch {

// A single constant-shift anomaly: streams in `streams` receive an additive
// offset of snr * (per-stream warm-up std) on ticks [start_tick,
// start_tick + duration_ticks).  snr = 0 marks the cells without moving data.
struct AnomalySpec {
  double snr = 7.0;
  Index duration_ticks = 180;   // 6 h at 2-minute ticks
  Index start_tick = 15120;     // start of the fourth week
  std::vector<Index> streams = {0, 1, 2};

  void validate(Index p, Index T) const;
};

// Ground-truth labels: cells(j, t) is true iff stream j is anomalous at t,
// plus the injection metadata needed to interpret them.
struct AnomalyMask {
  BoolMatrix cells;
  double snr = 0.0;
  Index duration_ticks = 0;
  std::vector<Index> streams;
};

struct LabeledDataset {
  SeriesMatrix data;   // p x T
  AnomalyMask mask;    // p x T
  FactorModel model;
  AnomalySpec anomaly;
};

// Anomaly-free stream: loadings * trends + independent fGn per stream.
// Deterministic in (model, T, seed); stream j's noise seed depends only on
// (seed, j), so adding or dropping streams never reshuffles the others.
// Changing T redraws the paths (the circulant embedding is length-dependent).
SeriesMatrix synthesize_background(const FactorModel& model, Index T, std::uint64_t seed);

// Background plus one injected anomaly.  The anomaly amplitude is calibrated
// against the empirical per-stream std over ticks [0, warmup_len) of the
// anomaly-free data -- the same window the detector later trains on.
LabeledDataset synthesize_dataset(const FactorModel& model, const AnomalySpec& anomaly, Index T,
                                  std::uint64_t seed, Index warmup_len = 10080);

}  // namespace portwatch
