#include "portwatch/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace portwatch {

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path, const char* who) {
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw std::runtime_error(std::string(who) + ": cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path, const char* who) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string(who) + ": cannot open " + path);
  return in;
}

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

double parse_cell(const std::string& cell, const std::string& path, int lineno) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
  return v;
}

// getline tolerant of a trailing CR (foreign files); our writers emit LF.
bool get_logical_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

void write_series_csv(const std::string& path, const Eigen::Ref<const SeriesMatrix>& data,
                      const std::vector<std::string>& names, Index tick0) {
  const Index p = data.rows();
  const Index T = data.cols();
  if (!names.empty() && static_cast<Index>(names.size()) != p)
    throw std::invalid_argument("write_series_csv: name count must match stream count");
  auto out = open_out(path, "write_series_csv");
  out << "t";
  for (Index j = 0; j < p; ++j) {
    out << ',';
    if (names.empty()) out << "port_" << j;
    else out << names[static_cast<std::size_t>(j)];
  }
  out << '\n';
  for (Index t = 0; t < T; ++t) {
    out << tick0 + t;
    for (Index j = 0; j < p; ++j) out << ',' << format_double(data(j, t));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_series_csv: write failed for " + path);
}

void write_mask_csv(const std::string& path, const Eigen::Ref<const BoolMatrix>& mask) {
  auto out = open_out(path, "write_mask_csv");
  out << "t";
  for (Index j = 0; j < mask.rows(); ++j) out << ",port_" << j;
  out << '\n';
  for (Index t = 0; t < mask.cols(); ++t) {
    out << t;
    for (Index j = 0; j < mask.rows(); ++j) out << ',' << (mask(j, t) ? '1' : '0');
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_mask_csv: write failed for " + path);
}

BoolMatrix read_mask_csv(const std::string& path) {
  auto in = open_in(path, "read_mask_csv");
  std::string line;
  if (!get_logical_line(in, line)) throw std::runtime_error("read_mask_csv: empty file " + path);
  const auto header = split_line(line);
  if (header.size() < 2) throw std::runtime_error("read_mask_csv: header needs a tick column plus streams");
  const auto p = static_cast<Index>(header.size() - 1);

  std::vector<std::vector<bool>> columns;
  int lineno = 1;
  while (get_logical_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (static_cast<Index>(cells.size()) != p + 1)
      throw std::runtime_error("read_mask_csv: " + path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(p + 1) + " cells, got " + std::to_string(cells.size()));
    std::vector<bool> col(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
      const auto& cell = cells[static_cast<std::size_t>(j + 1)];
      if (cell == "0") col[static_cast<std::size_t>(j)] = false;
      else if (cell == "1") col[static_cast<std::size_t>(j)] = true;
      else
        throw std::runtime_error("read_mask_csv: " + path + ":" + std::to_string(lineno) +
                                 ": mask cell must be 0 or 1, got '" + cell + "'");
    }
    columns.push_back(std::move(col));
  }
  BoolMatrix mask(p, static_cast<Index>(columns.size()));
  for (Index t = 0; t < mask.cols(); ++t)
    for (Index j = 0; j < p; ++j) mask(j, t) = columns[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
  return mask;
}

void write_alerts_csv(const std::string& path, const AlertMatrix& alerts) {
  auto out = open_out(path, "write_alerts_csv");
  out << "tick,stream,residual,centered_abs,threshold\n";
  for (const auto& rec : alerts.records) {
    out << rec.tick << ',' << rec.stream << ',' << format_double(rec.residual) << ','
        << format_double(rec.centered_abs) << ',' << format_double(rec.threshold) << '\n';
  }
  if (!out) throw std::runtime_error("write_alerts_csv: write failed for " + path);
}

AlertMatrix read_alerts_csv(const std::string& path, Index p, Index T) {
  auto in = open_in(path, "read_alerts_csv");
  std::string line;
  if (!get_logical_line(in, line)) throw std::runtime_error("read_alerts_csv: empty file " + path);
  if (split_line(line).size() != 5)
    throw std::runtime_error("read_alerts_csv: unexpected header in " + path);
  AlertMatrix alerts;
  alerts.p = p;
  alerts.T = T;
  int lineno = 1;
  while (get_logical_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != 5)
      throw std::runtime_error("read_alerts_csv: " + path + ":" + std::to_string(lineno) +
                               ": expected 5 cells");
    AlertRecord rec;
    rec.tick = static_cast<Index>(parse_cell(cells[0], path, lineno));
    rec.stream = static_cast<Index>(parse_cell(cells[1], path, lineno));
    rec.residual = parse_cell(cells[2], path, lineno);
    rec.centered_abs = parse_cell(cells[3], path, lineno);
    rec.threshold = parse_cell(cells[4], path, lineno);
    if (rec.tick < 0 || rec.tick >= T || rec.stream < 0 || rec.stream >= p)
      throw std::runtime_error("read_alerts_csv: " + path + ":" + std::to_string(lineno) +
                               ": record outside the declared matrix bounds");
    alerts.records.push_back(rec);
  }
  return alerts;
}

}  // namespace portwatch
