#ifndef PANELSEG_CUSUM_HPP
#define PANELSEG_CUSUM_HPP

#include <span>
#include <vector>

#include "panelseg/panel.hpp"

namespace panelseg {

// How the cross-sectional double CUSUM aggregates the ordered |CUSUM|s:
// exponent mode D^phi_m, or the combined statistic gamma * D^0_m + D^{1/2}_m.
struct DcMode {
  enum class Kind { exponent, combined };
  Kind kind = Kind::combined;
  double phi = 0.5;    // exponent mode only
  double gamma = 0.0;  // combined mode; <= 0 means "resolve to log n at use"

  static DcMode exponent(double phi);
  static DcMode combined(double gamma = 0.0);
};

// gamma_n for the combined statistic: explicit value if positive, else log n
// (1.0 for the degenerate single-series panel where log 1 = 0).
double resolve_gamma(const DcMode& mode, long n);

// Result of maximising the double CUSUM over candidate break points b and
// cardinalities m on one window.  order/signs describe the |CUSUM| ordering at
// b_hat: sorted_abs[i] = signs[i] * X^{order[i]}, order 1-based series ids.
struct CusumScanResult {
  double stat = 0.0;
  long b_hat = 0;
  long m_hat = 0;
  std::vector<long> order;
  std::vector<int> signs;
};

// CUSUM transform of one scaled series on the window [s, e] (1-based,
// inclusive).  x spans the full series; output[i] corresponds to b = s + i,
// b = s..e-1.  One prefix-sum pass.
std::vector<double> cusum_series(std::span<const double> x, long s, long e);

// Ordered |CUSUM| values across the panel at a fixed (s, b, e).
struct OrderedCusums {
  std::vector<double> sorted_abs;  // descending
  std::vector<long> order;         // series index per rank, ties by smaller index
  std::vector<int> signs;          // sign of X^{order[i]} (+1 for zero)
};
OrderedCusums ordered_abs_cusums(const ScaledPanel& panel, long s, long b, long e);

// D^phi_m / combined statistic of a descending |CUSUM| vector.  Validates the
// ordering; m = n treats the empty tail sum as zero.
double double_cusum(std::span<const double> sorted_abs, long m, const DcMode& mode);

// Max over b in [s,e] \ ([s,s+d_T] u [e-d_T,e]) (and b < e) and m in 1..n.
// Ties: smallest b, then smallest m.
CusumScanResult dc_scan(const ScaledPanel& panel, long s, long e, const DcMode& mode, long d_T);

// Projection vector p^phi_{b,m} reproducing the double CUSUM as the CUSUM of
// the projected raw series <x_t, p>.  Exponent mode only; oc must come from
// the same (s, b, e).
std::vector<double> projection_vector(const OrderedCusums& oc,
                                      const std::vector<double>& scales,
                                      long m, double phi);

// ---------------------------------------------------------------- scan engine
// Shared low-level machinery for dc_scan, the bootstrap moving-window scans,
// and the competitor statistics.  Prefix sums are built once per panel so a
// window scan costs O(n log n) per candidate b.

struct PanelPrefix {
  long n = 0;
  long T = 0;
  std::vector<double> P;   // (T+1) per series: P[j][t] = sum of x[j][1..t]
  std::vector<double> Pt;  // time-major mirror, Pt[t*n + j-1] = P[j][t]; scan loops
                           // read one contiguous row per time index

  static PanelPrefix build(const double* values, long n, long T);
  static PanelPrefix build(const ScaledPanel& panel);
  // Sum of series j over times [a, b], 1-based inclusive.
  double seg(long j, long a, long b) const {
    return P[static_cast<size_t>((j - 1) * (T + 1) + b)] -
           P[static_cast<size_t>((j - 1) * (T + 1) + a - 1)];
  }
};

// Per-m multipliers: every mode reduces to mult[m-1] * (head mean - tail mean).
std::vector<double> mode_multipliers(long n, const DcMode& mode);

struct ScanBest {
  double stat = -1.0;  // the statistic is always >= 0, so -1 loses to any b
  long b = 0;
  long m = 0;
};

struct ScanWorkspace {
  std::vector<double> absx;  // |CUSUM| at the current b, heap-popped descending in place
  // Prune tables (per-m constants and scratch), rebuilt per scan_window call.
  std::vector<double> sqrt_m;
  std::vector<double> inv_m;
  std::vector<double> inv_tail;
  std::vector<double> suffix_max;  // nm x n: max of mult[m'..n] per mode
  long eval_count = 0;             // candidates that survived the prune (diagnostics)
};

// Scan one window [s, e] with trim d_T, updating one ScanBest per mode
// (multiplier set).  bests must be pre-initialised; candidates are visited in
// ascending b so the smallest-b/smallest-m tie-break is by strict >.
void scan_window(const PanelPrefix& pp, long s, long e, long d_T,
                 std::span<const std::vector<double>> mults,
                 ScanWorkspace& ws, std::span<ScanBest> bests);

// Candidate range helpers (empty iff e - s <= 2 d_T + 1).
inline long first_candidate(long s, long d_T) { return s + d_T + 1; }
inline long last_candidate(long e, long d_T) { return e - d_T - 1; }

}  // namespace panelseg

#endif  // PANELSEG_CUSUM_HPP
