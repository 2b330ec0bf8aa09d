#ifndef PANELSEG_REFERENCE_DETECTORS_HPP
#define PANELSEG_REFERENCE_DETECTORS_HPP

#include <cstdint>
#include <span>

#include "panelseg/panel.hpp"

namespace panelseg {

// Competitor single-change-point detectors for the benchmark harness.  All
// operate on per-series scaled panels.  d_T < 0 scans every b in [s, e);
// d_T >= 0 applies the same end trimming as the double CUSUM scan.

struct StatLocation {
  double stat = 0.0;
  long b_hat = 0;  // 0 when the candidate set is empty
};

struct CompetitorResult {
  enum class Name { sbs, jirak, eh_linear, eh_scan, eh_combined };
  Name name = Name::sbs;
  double stat = 0.0;
  long b_hat = 0;  // 0: the detector does not locate
  bool rejected = false;
  double threshold_used = 0.0;
};

// Thresholded CUSUM sum: max_b sum_j |X^j| 1(|X^j| > pi_T), ties to the
// smallest b.  Rejection rule of its user: stat > 0.
StatLocation sbs_statistic(const ScaledPanel& panel, long s, long e, double pi_T,
                           long d_T = -1);

// Pointwise maximum of the weighted CUSUM panel:
// max_b max_j sqrt(b(T-b)/T) |X^j_{1,b,T}|.
StatLocation jirak_statistic(const ScaledPanel& panel, long d_T = -1);

// chi^2_df quantile via the inverse regularized incomplete gamma.
double chi_squared_quantile(double p, double df);

// T_m = 2 (2m)^{-1/2} {m log(ne/m) + log(nT/alpha)}.  scale_by_2n swaps the
// leading (2m)^{-1/2} for (2n)^{-1/2} (alternative normalisation).
double eh_tail_weight(long m, long n, long T, double alpha, bool scale_by_2n = false);

struct EhResult {
  double linear = 0.0;
  double scan = 0.0;
  bool combined_reject = false;
};

// Linear statistic max_b sum_j ((X^j)^2 - 1) / (H sqrt(2n)) with H the
// (1 - alpha/2) chi^2_n quantile, and scan statistic
// max_b max_m sum_{j<=m} ((X^{(j)})^2 - 1) / (T_m sqrt(2m)) over the
// descending-|X| ordering.  Rejects when either statistic exceeds 1; no
// location estimate is defined.
EhResult eh_statistics(const ScaledPanel& panel, double alpha, long d_T = -1,
                       bool scale_by_2n = false);

// Empirical (1 - alpha)-quantile (rank ceil((1-alpha) B)) of the
// per-replicate max_{b in [1,T), j} |CUSUM| over noise-only panels.
double sbs_oracle_threshold(std::span<const ScaledPanel> noise_panels, double alpha);

// Circular block bootstrap of whole cross-section columns of the
// standardized residuals (fixed block length); (1 - alpha)-quantile of the
// replicate weighted max-CUSUM statistics.
double jirak_block_threshold(const PanelData& std_residuals, double alpha, long B,
                             std::uint64_t seed, long block_len = 4, long d_T = -1);

}  // namespace panelseg

#endif  // PANELSEG_REFERENCE_DETECTORS_HPP
