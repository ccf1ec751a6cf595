#pragma once

#include <optional>
#include <string>
#include <vector>

#include "portwatch/types.hpp"

namespace portwatch {

struct IngestOptions {
  bool log_transform = false;                               // x -> ln(1 + x)
  std::optional<std::vector<std::string>> stream_selection;  // by header name
  std::string tick_column = "t";
};

struct LoadedSeries {
  SeriesMatrix data;  // p x T, stream j = file column j+1 (after selection)
  std::vector<std::string> names;
};

// Header + one row per tick; empty cells become NaN (downstream the detector
// rejects such ticks).  Malformed rows and unknown selected columns throw
// with the offending line/name.
LoadedSeries load_timeseries_csv(const std::string& path, const IngestOptions& options);

// Streams ranked by total sum, descending, ties by original index.
std::vector<Index> top_k_stream_indices(const Eigen::Ref<const SeriesMatrix>& data, Index k);
SeriesMatrix top_k_streams(const Eigen::Ref<const SeriesMatrix>& data, Index k);

// ln(1 + x) elementwise; kept separate so top-k selection can rank the raw
// (pre-transform) sums.
void apply_log_transform(SeriesMatrix& data);

}  // namespace portwatch
