#ifndef PANELSEG_DCBS_HPP
#define PANELSEG_DCBS_HPP

#include <functional>
#include <string>
#include <vector>

#include "panelseg/config.hpp"
#include "panelseg/cusum.hpp"
#include "panelseg/panel.hpp"

namespace panelseg {

// Node of the binary segmentation tree.  Children of (level p, position q)
// sit at (p+1, 2q-1) and (p+1, 2q) and partition [s, e] as [s, eta], [eta+1, e].
struct SegmentNode {
  enum class Verdict { split, stop, too_short };
  long level = 1;
  long position = 1;
  long s = 0, e = 0;
  Verdict verdict = Verdict::stop;
  double stat = 0.0;       // split/stop only
  double threshold = 0.0;  // split/stop only
  long eta = 0, m = 0;     // split only
  std::vector<SegmentNode> children;
};

struct ChangePoint {
  long eta = 0;
  long m = 0;
  std::vector<long> contributors;  // ascending series ids, size m
  double stat = 0.0;
  double threshold = 0.0;
  bool survived = true;  // post-process verdict
};

struct ChangePointReport {
  long n = 0, T = 0;
  DetectorConfig config;
  long depth = 0;            // L_T actually used
  double alpha_effective = 0.0;
  double gamma = 0.0;        // resolved gamma_n (combined mode), else 0
  std::vector<ChangePoint> change_points;  // sorted by eta; includes removed ones
  SegmentNode tree;
  std::string version;

  long surviving_count() const {
    long k = 0;
    for (const auto& cp : change_points) k += cp.survived ? 1 : 0;
    return k;
  }
};

// Threshold for a window, keyed by its length (bootstrap moving-window reuse).
using ThresholdFn = std::function<double(long window_len)>;

// Breadth-first double CUSUM binary segmentation.  Windows of length
// < 2 d_T + 4 are marked too_short and never scanned.
ChangePointReport dcbs_run(const ScaledPanel& panel, const DcMode& mode,
                           const ThresholdFn& threshold_fn, long d_T);

// Re-checks every recorded change-point on [eta_r - d_r, eta_r + d_r] with
// d_r = min(gap to neighbours)/2, floored at d_T + 2 and kept inside [1, T];
// updates the survived flags only (idempotent).
ChangePointReport post_process(const ScaledPanel& panel, ChangePointReport report,
                               const DcMode& mode, const ThresholdFn& threshold_fn, long d_T);

// Full pipeline: scaling, standardization, bootstrap thresholds (Bonferroni
// alpha*/(2^{L_T}-1) when enabled), segmentation, post-processing.
ChangePointReport detect(const PanelData& panel, const DetectorConfig& config);

// Stable JSON rendering (1-based times, field names fixed).
std::string report_to_json(const ChangePointReport& report);

}  // namespace panelseg

#endif  // PANELSEG_DCBS_HPP
