#ifndef PANELSEG_SCALING_HPP
#define PANELSEG_SCALING_HPP

#include <span>
#include <vector>

#include "panelseg/panel.hpp"

namespace panelseg {

// Per-series long-run variance estimates used to scale the CUSUMs, together
// with the de-trended residuals the bootstrap consumes.
struct ScalingEstimate {
  std::vector<double> sigma2;  // sigma_hat^2_j, > 0
  std::vector<long> tau;       // bandwidth anchors, >= 1
  PanelData residuals;         // eps_bar_{j,t}, n x T
};

// Default segmentation-tree depth L_T = floor(log2(log T + 1)) (natural log);
// shared by the residual tree and the Bonferroni divisor.
long default_tree_depth(long T);

// Residuals after removing per-leaf means of a depth-L_T binary CUSUM-split
// tree (intervals shorter than 4 points are not split further).
std::vector<double> estimate_residuals(std::span<const double> x, long depth);

// Flat-top lag window: 1 on |t| <= 1/2, linear decay to 0 at |t| = 1.
double flat_top_weight(double t);

// Bandwidth anchor: smallest tau >= 1 with |c(tau+k)/c(0)| below
// 1.4*sqrt(log10(T)/T) for k = 1,2,3; capped at max(1, floor(T/4) - 3).
// autocov[k] = c(k); T is the residual series length.
long flat_top_bandwidth(std::span<const double> autocov, long T);

struct LrvResult {
  double sigma2 = 0.0;
  long tau = 0;
};

// Flat-top kernel long-run variance with the automatic bandwidth; floored at
// c(0)/2 because the kernel sum can go negative.
LrvResult long_run_variance(std::span<const double> residuals);

// Per-series composition of estimate_residuals and long_run_variance.
// depth <= 0 selects default_tree_depth(T).
ScalingEstimate estimate_scales(const PanelData& panel, long depth = 0);

}  // namespace panelseg

#endif  // PANELSEG_SCALING_HPP
