#include "portwatch/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace portwatch {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

LoadedSeries load_timeseries_csv(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_timeseries_csv: cannot open " + path);

  std::string line;
  auto next_line = [&](std::string& s) {
    if (!std::getline(in, s)) return false;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return true;
  };

  if (!next_line(line)) throw std::runtime_error("load_timeseries_csv: empty file " + path);
  const auto header = split_line(line);
  if (header.size() < 2)
    throw std::runtime_error("load_timeseries_csv: header needs the tick column plus at least one stream");
  if (header.front() != options.tick_column)
    throw std::runtime_error("load_timeseries_csv: first header cell is '" + header.front() +
                             "', expected tick column '" + options.tick_column + "'");

  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<Index> keep(names.size());
  std::iota(keep.begin(), keep.end(), Index{0});
  if (options.stream_selection) {
    keep.clear();
    for (const auto& wanted : *options.stream_selection) {
      const auto it = std::find(names.begin(), names.end(), wanted);
      if (it == names.end())
        throw std::runtime_error("load_timeseries_csv: selected column '" + wanted + "' not in header");
      keep.push_back(static_cast<Index>(it - names.begin()));
    }
  }

  const auto n_file_streams = static_cast<Index>(names.size());
  std::vector<std::vector<double>> columns;  // one inner vector per tick
  int lineno = 1;
  while (next_line(line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (static_cast<Index>(cells.size()) != n_file_streams + 1)
      throw std::runtime_error("load_timeseries_csv: " + path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(n_file_streams + 1) + " cells, got " +
                               std::to_string(cells.size()));
    std::vector<double> tick(static_cast<std::size_t>(n_file_streams));
    for (Index j = 0; j < n_file_streams; ++j) {
      const auto& cell = cells[static_cast<std::size_t>(j + 1)];
      if (cell.empty()) {
        tick[static_cast<std::size_t>(j)] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw std::runtime_error("load_timeseries_csv: " + path + ":" + std::to_string(lineno) +
                                 ": non-numeric cell '" + cell + "'");
      tick[static_cast<std::size_t>(j)] = v;
    }
    columns.push_back(std::move(tick));
  }
  if (columns.empty()) throw std::runtime_error("load_timeseries_csv: no data rows in " + path);

  LoadedSeries out;
  const auto p = static_cast<Index>(keep.size());
  const auto T = static_cast<Index>(columns.size());
  out.data.resize(p, T);
  out.names.reserve(keep.size());
  for (const Index j : keep) out.names.push_back(names[static_cast<std::size_t>(j)]);
  for (Index t = 0; t < T; ++t) {
    for (Index j = 0; j < p; ++j) {
      out.data(j, t) = columns[static_cast<std::size_t>(t)][static_cast<std::size_t>(keep[static_cast<std::size_t>(j)])];
    }
  }
  if (options.log_transform) apply_log_transform(out.data);
  return out;
}

std::vector<Index> top_k_stream_indices(const Eigen::Ref<const SeriesMatrix>& data, Index k) {
  const Index p = data.rows();
  if (k < 0 || k > p) throw std::invalid_argument("top_k_streams: k must lie in [0, p]");
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector<double> sums = data.rowwise().sum();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sums[a] > sums[b]; });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

SeriesMatrix top_k_streams(const Eigen::Ref<const SeriesMatrix>& data, Index k) {
  const auto indices = top_k_stream_indices(data, k);
  SeriesMatrix out(static_cast<Index>(indices.size()), data.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) out.row(static_cast<Index>(i)) = data.row(indices[i]);
  return out;
}

void apply_log_transform(SeriesMatrix& data) { data = (data.array() + 1.0).log(); }

}  // namespace portwatch
