#ifndef PANELSEG_BOOTSTRAP_HPP
#define PANELSEG_BOOTSTRAP_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <vector>

#include "panelseg/config.hpp"
#include "panelseg/cusum.hpp"
#include "panelseg/panel.hpp"

namespace panelseg {

// ------------------------------------------------------- factor number (IC)
struct FactorSelection {
  long q = 0;
  std::vector<double> ic;  // IC(k) for k = 0..Q
};

// Information-criterion choice of the number of common shocks on the
// standardized residual panel; IC(k) = log(residual mean square after
// removing k principal components) + k log(C)/C, C = min(n, T),
// k = 0..Q = floor(C / log C), ties to the smaller k.
FactorSelection estimate_factor_number(const PanelData& residuals);

// --------------------------------------------------- dynamic decomposition
// Common/idiosyncratic split of the residual panel via dynamic principal
// components: spectral density estimated by a Bartlett lag window (truncation
// M), q leading eigenvectors taken at every FFT frequency and inverse-
// transformed to a lag filter b(L) truncated to -M..M.  The shocks are the q
// dynamic principal component series; common = b(L) applied to the shocks
// (circular over t = 1..T, evaluated in the frequency domain).  Because the
// eigenvectors come from the full FFT grid, the truncated filter stays close
// to the orthogonal projection, so common and idio barely overlap in sample
// and resampling them independently nearly conserves the panel's variance.
struct GdfmDecomposition {
  long n = 0, T = 0;
  long q = 0;   // number of common shocks
  long M = 0;   // filter truncation / spectral bandwidth
  PanelData shocks;  // q x T (empty when q = 0)
  PanelData common;  // n x T
  PanelData idio;    // n x T; common + idio == residuals exactly
  std::vector<double> filter;  // lag-major (2M+1) x n x q: b_l[j,k], l = -M..M

  // Response of the truncated filter on the FFT grid (f = 0..T/2), row-major
  // f x (n x q); both the in-sample split and the resampling path filter
  // through this.
  std::vector<std::complex<double>> freq_response;

  double filter_lag(long l, long j, long k) const {  // l in -M..M, j,k 1-based
    return filter[static_cast<size_t>(((l + M) * n + (j - 1)) * q + (k - 1))];
  }
};

// M <= 0 selects floor(sqrt(T)).
GdfmDecomposition decompose_gdfm(const PanelData& residuals, long q, long M = 0);

// Redraw each shock series i.i.d. with replacement from its own values and
// push the redraw through the filter (circular).  q = 0 gives a zero matrix.
PanelData resample_common(const GdfmDecomposition& decomp, std::mt19937_64& rng);

// Frequency-domain resampling of the idiosyncratic panel: for each Fourier
// index f in 1..floor(T/2) draw a replacement index from the uniform (Daniell)
// window of half-width h around f (clipped to the valid range), the same draw
// for all n series; Hermitian assembly, inverse FFT.
// kernel_window: < 0 selects h = max(1, floor(0.05 T)); 0 is the identity.
PanelData local_bootstrap_idio(const PanelData& idio, long kernel_window, std::mt19937_64& rng);

// --------------------------------------------------------------- thresholds
struct BootstrapThreshold {
  long window_len = 0;
  double alpha = 0.0;
  long B = 0;
  double quantile = 0.0;
  // Unsorted scan statistics the quantile is drawn from.  For window_len = T
  // this is one stat per replicate (size B); for shorter windows the replicate
  // panels are scanned at every start position and the stats pooled
  // (replicate-major, size B * (T - window_len + 1)), since windows of equal
  // length are identically distributed under the resampling scheme.
  std::vector<double> replicate_stats;
};

// Bootstrap engine: runs the decomposition once, generates B replicate panels
// eps^l = common^l + idio^l on independent per-replicate substreams, and
// serves scan-statistic thresholds for any window length (window stats pooled
// over all start positions for lengths < T), one threshold per configured
// mode.  Replicates are kept as prefix-sum panels so each threshold request
// costs only scans.
class BootstrapEngine {
 public:
  BootstrapEngine(const PanelData& std_residuals, std::vector<DcMode> modes,
                  long B, double alpha, long d_T, std::uint64_t seed, int threads);

  // Thresholds for every configured mode at this window length (cached).
  const std::vector<BootstrapThreshold>& thresholds(long window_len) const;
  const BootstrapThreshold& threshold(long window_len, size_t mode_index = 0) const {
    return thresholds(window_len)[mode_index];
  }

  long factor_count() const { return decomp_.q; }
  const GdfmDecomposition& decomposition() const { return decomp_; }

 private:
  long n_ = 0, T_ = 0, B_ = 0, d_T_ = 0;
  double alpha_ = 0.05;
  int threads_ = 1;
  std::uint64_t seed_ = 0;
  std::vector<DcMode> modes_;
  std::vector<std::vector<double>> mults_;
  GdfmDecomposition decomp_;
  std::vector<PanelPrefix> replicates_;
  mutable std::mutex cache_mutex_;
  mutable std::map<long, std::vector<BootstrapThreshold>> cache_;
};

// One-shot composition on raw data: scaling, decomposition, B replicates,
// scan statistic per replicate, empirical quantile at rank ceil((1-alpha) B).
BootstrapThreshold bootstrap_threshold(const PanelData& panel, const DetectorConfig& config,
                                       long window_len);

}  // namespace panelseg

#endif  // PANELSEG_BOOTSTRAP_HPP
