// Long-run variance estimation: binary CUSUM-split residual tree, flat-top
// kernel with automatic bandwidth.

#include "panelseg/scaling.hpp"

#include <cmath>
#include <string>

#include "panelseg/cusum.hpp"
#include "panelseg/errors.hpp"

namespace panelseg {

long default_tree_depth(long T) {
  if (T < 2) return 1;
  long d = static_cast<long>(std::floor(std::log2(std::log(static_cast<double>(T)) + 1.0)));
  return d < 1 ? 1 : d;
}

namespace {

// Split [s, e] (1-based, inclusive) at the |CUSUM| argmax, recurse to the
// depth limit, then remove per-leaf sample means.  Intervals shorter than 4
// points become leaves regardless of remaining depth.
void tree_split(std::span<const double> x, long s, long e, long depth,
                std::vector<double>& out) {
  if (depth <= 0 || e - s + 1 < 4) {
    double mean = 0.0;
    for (long t = s; t <= e; ++t) mean += x[static_cast<size_t>(t - 1)];
    mean /= static_cast<double>(e - s + 1);
    for (long t = s; t <= e; ++t) out[static_cast<size_t>(t - 1)] = x[static_cast<size_t>(t - 1)] - mean;
    return;
  }
  std::vector<double> c = cusum_series(x, s, e);
  long eta = s;
  double best = -1.0;
  for (long b = s; b < e; ++b) {
    double v = std::fabs(c[static_cast<size_t>(b - s)]);
    if (v > best) {
      best = v;
      eta = b;
    }
  }
  tree_split(x, s, eta, depth - 1, out);
  tree_split(x, eta + 1, e, depth - 1, out);
}

}  // namespace

std::vector<double> estimate_residuals(std::span<const double> x, long depth) {
  const long T = static_cast<long>(x.size());
  if (T < 4) throw DimensionError("estimate_residuals: need T >= 4, got " + std::to_string(T));
  if (depth < 1) throw DomainError("estimate_residuals: depth must be >= 1");
  std::vector<double> out(static_cast<size_t>(T));
  tree_split(x, 1, T, depth, out);
  return out;
}

double flat_top_weight(double t) {
  const double a = std::fabs(t);
  if (a <= 0.5) return 1.0;
  if (a < 1.0) return 2.0 * (1.0 - a);
  return 0.0;
}

long flat_top_bandwidth(std::span<const double> autocov, long T) {
  const long max_lag = static_cast<long>(autocov.size()) - 1;
  const double c0 = autocov[0];
  long cap = T / 4 - 3;
  if (cap < 1) cap = 1;
  const double bound = 1.4 * std::sqrt(std::log10(static_cast<double>(T)) / static_cast<double>(T));
  for (long tau = 1; tau <= cap; ++tau) {
    if (tau + 3 > max_lag) break;
    bool ok = true;
    for (long k = 1; k <= 3; ++k) {
      if (std::fabs(autocov[static_cast<size_t>(tau + k)] / c0) >= bound) {
        ok = false;
        break;
      }
    }
    if (ok) return tau;
  }
  return cap;
}

LrvResult long_run_variance(std::span<const double> residuals) {
  const long T = static_cast<long>(residuals.size());
  if (T < 8) throw DimensionError("long_run_variance: need T >= 8, got " + std::to_string(T));
  bool all_zero = true;
  for (double v : residuals) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) throw DegenerateError("long_run_variance: residuals identically zero");

  std::vector<double> c(static_cast<size_t>(T), 0.0);  // c(0)..c(T-1)
  for (long k = 0; k < T; ++k) {
    double s = 0.0;
    for (long t = 0; t + k < T; ++t) s += residuals[static_cast<size_t>(t)] * residuals[static_cast<size_t>(t + k)];
    c[static_cast<size_t>(k)] = s / static_cast<double>(T);
  }
  if (c[0] <= 0.0) throw DegenerateError("long_run_variance: zero variance residuals");

  LrvResult r;
  r.tau = flat_top_bandwidth(c, T);
  double sum = c[0];
  const long K = 2 * r.tau;
  for (long k = 1; k <= K && k < T; ++k) {
    sum += 2.0 * flat_top_weight(static_cast<double>(k) / static_cast<double>(K)) * c[static_cast<size_t>(k)];
  }
  r.sigma2 = sum > c[0] / 2.0 ? sum : c[0] / 2.0;
  return r;
}

ScalingEstimate estimate_scales(const PanelData& panel, long depth) {
  const long L = depth > 0 ? depth : default_tree_depth(panel.T);
  ScalingEstimate est;
  est.sigma2.resize(static_cast<size_t>(panel.n));
  est.tau.resize(static_cast<size_t>(panel.n));
  est.residuals = PanelData(panel.n, panel.T);
  for (long j = 1; j <= panel.n; ++j) {
    try {
      std::vector<double> res =
          estimate_residuals(std::span<const double>(panel.row(j), static_cast<size_t>(panel.T)), L);
      LrvResult lrv = long_run_variance(res);
      est.sigma2[static_cast<size_t>(j - 1)] = lrv.sigma2;
      est.tau[static_cast<size_t>(j - 1)] = lrv.tau;
      for (long t = 1; t <= panel.T; ++t) est.residuals.at(j, t) = res[static_cast<size_t>(t - 1)];
    } catch (const Error& e) {
      throw Error(e.code(), "series " + std::to_string(j) + ": " + e.what());
    }
  }
  return est;
}

}  // namespace panelseg
