#ifndef PANELSEG_PANEL_HPP
#define PANELSEG_PANEL_HPP

#include <string>
#include <vector>

namespace panelseg {

// n series observed over T times, row-contiguous per series.  All public
// indices are 1-based (series j = 1..n, time t = 1..T) to match the
// conventions used in reports and error messages.
struct PanelData {
  long n = 0;
  long T = 0;
  std::vector<double> values;  // values[(j-1)*T + (t-1)]

  PanelData() = default;
  PanelData(long n_, long T_) : n(n_), T(T_), values(static_cast<size_t>(n_ * T_), 0.0) {}

  double& at(long j, long t) { return values[static_cast<size_t>((j - 1) * T + (t - 1))]; }
  double at(long j, long t) const { return values[static_cast<size_t>((j - 1) * T + (t - 1))]; }
  double* row(long j) { return values.data() + (j - 1) * T; }
  const double* row(long j) const { return values.data() + (j - 1) * T; }
};

// Panel divided through by per-series scales sigma_j > 0.
struct ScaledPanel {
  long n = 0;
  long T = 0;
  std::vector<double> values;  // x_{j,t} / sigma_j, same layout as PanelData
  std::vector<double> scales;  // sigma_j, length n

  double at(long j, long t) const { return values[static_cast<size_t>((j - 1) * T + (t - 1))]; }
  const double* row(long j) const { return values.data() + (j - 1) * T; }
};

// CSV ingestion: series per row, comma separated, optional single header row.
// Ragged rows and non-numeric cells are parse errors naming (row, col).
PanelData load_csv(const std::string& path, bool has_header = false);
void write_csv(const PanelData& panel, const std::string& path);

// Serialize to CSV text at 17 significant digits (bit-exact round-trip).
std::string to_csv(const PanelData& panel);
PanelData parse_csv(const std::string& text, bool has_header = false);

ScaledPanel standardize(const PanelData& panel, const std::vector<double>& scales);

}  // namespace panelseg

#endif  // PANELSEG_PANEL_HPP
