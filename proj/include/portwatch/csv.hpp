#pragma once

#include <string>
#include <vector>

#include "portwatch/detector.hpp"
#include "portwatch/types.hpp"

namespace portwatch {

// Shortest-round-trip decimal form (up to 17 significant digits); the single
// serialization used everywhere so written matrices re-read bit-exactly.
std::string format_double(double value);

// Data CSV: header `t,<name>,...`, one row per tick, LF endings.  Stream j
// of the matrix is file column j+1; names default to port_<j>.  tick0 labels
// the first column (residual dumps start after the warm-up).
void write_series_csv(const std::string& path, const Eigen::Ref<const SeriesMatrix>& data,
                      const std::vector<std::string>& names = {}, Index tick0 = 0);

// Mask CSV mirrors the data layout with 0/1 cells.
void write_mask_csv(const std::string& path, const Eigen::Ref<const BoolMatrix>& mask);
BoolMatrix read_mask_csv(const std::string& path);

// Alerts CSV: `tick,stream,residual,centered_abs,threshold`.
void write_alerts_csv(const std::string& path, const AlertMatrix& alerts);
// p and T restore the matrix bounds the record list is validated against.
AlertMatrix read_alerts_csv(const std::string& path, Index p, Index T);

}  // namespace portwatch
