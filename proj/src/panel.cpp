// Panel data model: CSV ingestion/serialization and standardization.

#include "panelseg/panel.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "panelseg/errors.hpp"

namespace panelseg {

namespace {

// Parse one CSV line into doubles; 1-based row index only for error messages.
void parse_row(const std::string& line, long row, std::vector<double>& out) {
  out.clear();
  size_t pos = 0;
  long col = 0;
  while (true) {
    size_t comma = line.find(',', pos);
    std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    ++col;
    // trim surrounding blanks
    size_t b = cell.find_first_not_of(" \t\r");
    size_t e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) {
      throw ParseError("empty cell at (" + std::to_string(row) + ", " + std::to_string(col) + ")");
    }
    cell = cell.substr(b, e - b + 1);
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(v)) {
      throw ParseError("non-numeric cell at (" + std::to_string(row) + ", " +
                       std::to_string(col) + "): '" + cell + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
}

bool looks_like_header(const std::string& line) {
  std::vector<double> tmp;
  try {
    parse_row(line, 1, tmp);
    return false;
  } catch (const ParseError&) {
    return true;
  }
}

}  // namespace

PanelData parse_csv(const std::string& text, bool has_header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  long lineno = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;  // blank
    if (has_header && !skipped_header) {
      skipped_header = true;
      if (looks_like_header(line)) continue;  // numeric "header" counts as data
    }
    rows.emplace_back();
    parse_row(line, static_cast<long>(rows.size()), rows.back());
    if (rows.size() > 1 && rows.back().size() != rows.front().size()) {
      throw ParseError("ragged row " + std::to_string(rows.size()) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, got " +
                       std::to_string(rows.back().size()));
    }
  }
  if (rows.empty()) throw DimensionError("no rows");
  long T = static_cast<long>(rows.front().size());
  if (T < 2) throw DimensionError("need T >= 2 time points, got " + std::to_string(T));
  PanelData p(static_cast<long>(rows.size()), T);
  for (long j = 1; j <= p.n; ++j)
    for (long t = 1; t <= p.T; ++t) p.at(j, t) = rows[static_cast<size_t>(j - 1)][static_cast<size_t>(t - 1)];
  return p;
}

PanelData load_csv(const std::string& path, bool has_header) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_csv(buf.str(), has_header);
}

std::string to_csv(const PanelData& panel) {
  std::string out;
  out.reserve(static_cast<size_t>(panel.n * panel.T) * 20);
  char cell[40];
  for (long j = 1; j <= panel.n; ++j) {
    for (long t = 1; t <= panel.T; ++t) {
      std::snprintf(cell, sizeof cell, "%.17g", panel.at(j, t));
      out += cell;
      out += (t == panel.T) ? '\n' : ',';
    }
  }
  return out;
}

void write_csv(const PanelData& panel, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << to_csv(panel);
  if (!f) throw IoError("write failed for '" + path + "'");
}

ScaledPanel standardize(const PanelData& panel, const std::vector<double>& scales) {
  if (static_cast<long>(scales.size()) != panel.n) {
    throw DimensionError("scales length " + std::to_string(scales.size()) +
                         " != n = " + std::to_string(panel.n));
  }
  for (long j = 1; j <= panel.n; ++j) {
    double s = scales[static_cast<size_t>(j - 1)];
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw DomainError("scale for series " + std::to_string(j) + " must be finite positive, got " +
                        std::to_string(s));
    }
  }
  ScaledPanel out;
  out.n = panel.n;
  out.T = panel.T;
  out.scales = scales;
  out.values.resize(panel.values.size());
  for (long j = 1; j <= panel.n; ++j) {
    double inv = 1.0 / scales[static_cast<size_t>(j - 1)];
    const double* src = panel.row(j);
    double* dst = out.values.data() + (j - 1) * panel.T;
    for (long t = 0; t < panel.T; ++t) dst[t] = src[t] * inv;
  }
  return out;
}

}  // namespace panelseg
