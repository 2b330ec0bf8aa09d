#include "panelseg/reference_detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "panelseg/cusum.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/rng.hpp"

namespace panelseg {

namespace {

double cusum_at(const PanelPrefix& pp, long j, long s, long b, long e) {
  const double left = pp.seg(j, s, b);
  const double right = pp.seg(j, b + 1, e);
  const double nl = static_cast<double>(b - s + 1);
  const double nr = static_cast<double>(e - b);
  const double len = static_cast<double>(e - s + 1);
  return std::sqrt(nr / (len * nl)) * left - std::sqrt(nl / (len * nr)) * right;
}

void candidate_range(long s, long e, long d_T, long& lo, long& hi) {
  if (d_T < 0) {
    lo = s;
    hi = e - 1;
  } else {
    lo = first_candidate(s, d_T);
    hi = last_candidate(e, d_T);
  }
}

long quantile_rank(double alpha, long B) {
  long rank = static_cast<long>(std::ceil((1.0 - alpha) * static_cast<double>(B)));
  return std::clamp<long>(rank, 1, B);
}

}  // namespace

StatLocation sbs_statistic(const ScaledPanel& panel, long s, long e, double pi_T, long d_T) {
  if (s < 1 || e > panel.T || s >= e) {
    throw DimensionError("sbs_statistic: window [" + std::to_string(s) + ", " +
                         std::to_string(e) + "] invalid for T = " + std::to_string(panel.T));
  }
  if (std::isnan(pi_T) || pi_T < 0.0) throw DomainError("sbs_statistic: pi_T must be >= 0");
  const PanelPrefix pp = PanelPrefix::build(panel);
  long lo = 0, hi = 0;
  candidate_range(s, e, d_T, lo, hi);
  StatLocation best;
  best.stat = -1.0;
  for (long b = lo; b <= hi; ++b) {
    double sum = 0.0;
    for (long j = 1; j <= panel.n; ++j) {
      const double a = std::abs(cusum_at(pp, j, s, b, e));
      if (a > pi_T) sum += a;
    }
    if (sum > best.stat) {
      best.stat = sum;
      best.b_hat = b;
    }
  }
  if (best.b_hat == 0) best.stat = 0.0;  // empty candidate set
  return best;
}

StatLocation jirak_statistic(const ScaledPanel& panel, long d_T) {
  if (panel.T < 4) throw DimensionError("jirak_statistic: need T >= 4");
  const PanelPrefix pp = PanelPrefix::build(panel);
  const long T = panel.T;
  long lo = 0, hi = 0;
  candidate_range(1, T, d_T, lo, hi);
  StatLocation best;
  best.stat = -1.0;
  for (long b = lo; b <= hi; ++b) {
    const double w = std::sqrt(static_cast<double>(b) * static_cast<double>(T - b) /
                               static_cast<double>(T));
    for (long j = 1; j <= panel.n; ++j) {
      const double v = w * std::abs(cusum_at(pp, j, 1, b, T));
      if (v > best.stat) {
        best.stat = v;
        best.b_hat = b;
      }
    }
  }
  if (best.b_hat == 0) best.stat = 0.0;
  return best;
}

double chi_squared_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi_squared_quantile: p must lie in (0, 1)");
  if (!(df > 0.0)) throw DomainError("chi_squared_quantile: df must be positive");
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

double eh_tail_weight(long m, long n, long T, double alpha, bool scale_by_2n) {
  if (m < 1 || m > n) throw DomainError("eh_tail_weight: m out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("eh_tail_weight: alpha outside (0, 1)");
  const double lead = 2.0 / std::sqrt(2.0 * static_cast<double>(scale_by_2n ? n : m));
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return lead * (md * std::log(nd * std::exp(1.0) / md) +
                 std::log(nd * static_cast<double>(T) / alpha));
}

EhResult eh_statistics(const ScaledPanel& panel, double alpha, long d_T, bool scale_by_2n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("eh_statistics: alpha outside (0, 1)");
  const long n = panel.n;
  const long T = panel.T;
  const PanelPrefix pp = PanelPrefix::build(panel);
  const double H = chi_squared_quantile(1.0 - alpha / 2.0, static_cast<double>(n));
  long lo = 0, hi = 0;
  candidate_range(1, T, d_T, lo, hi);

  std::vector<double> denom(static_cast<size_t>(n));
  for (long m = 1; m <= n; ++m) {
    denom[static_cast<size_t>(m - 1)] =
        eh_tail_weight(m, n, T, alpha, scale_by_2n) * std::sqrt(2.0 * static_cast<double>(m));
  }
  const double lin_denom = H * std::sqrt(2.0 * static_cast<double>(n));

  EhResult out;
  out.linear = -std::numeric_limits<double>::infinity();
  out.scan = -std::numeric_limits<double>::infinity();
  std::vector<double> absx(static_cast<size_t>(n));
  for (long b = lo; b <= hi; ++b) {
    double sq_sum = 0.0;
    for (long j = 1; j <= n; ++j) {
      const double v = cusum_at(pp, j, 1, b, T);
      absx[static_cast<size_t>(j - 1)] = std::abs(v);
      sq_sum += v * v - 1.0;
    }
    out.linear = std::max(out.linear, sq_sum / lin_denom);
    std::sort(absx.begin(), absx.end(), std::greater<double>());
    double running = 0.0;
    for (long m = 1; m <= n; ++m) {
      const double a = absx[static_cast<size_t>(m - 1)];
      running += a * a - 1.0;
      out.scan = std::max(out.scan, running / denom[static_cast<size_t>(m - 1)]);
    }
  }
  if (lo > hi) {
    out.linear = 0.0;
    out.scan = 0.0;
  }
  out.combined_reject = out.linear > 1.0 || out.scan > 1.0;
  return out;
}

double sbs_oracle_threshold(std::span<const ScaledPanel> noise_panels, double alpha) {
  if (noise_panels.empty()) throw DimensionError("sbs_oracle_threshold: need >= 1 replicate");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("sbs_oracle_threshold: alpha outside (0, 1)");
  }
  std::vector<double> maxima;
  maxima.reserve(noise_panels.size());
  for (const ScaledPanel& panel : noise_panels) {
    const PanelPrefix pp = PanelPrefix::build(panel);
    double mx = 0.0;
    for (long b = 1; b < panel.T; ++b) {
      for (long j = 1; j <= panel.n; ++j) {
        mx = std::max(mx, std::abs(cusum_at(pp, j, 1, b, panel.T)));
      }
    }
    maxima.push_back(mx);
  }
  std::sort(maxima.begin(), maxima.end());
  const long rank = quantile_rank(alpha, static_cast<long>(maxima.size()));
  return maxima[static_cast<size_t>(rank - 1)];
}

double jirak_block_threshold(const PanelData& std_residuals, double alpha, long B,
                             std::uint64_t seed, long block_len, long d_T) {
  if (B < 1) throw DomainError("jirak_block_threshold: need B >= 1");
  if (block_len < 1) throw DomainError("jirak_block_threshold: block length must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("jirak_block_threshold: alpha outside (0, 1)");
  }
  const long n = std_residuals.n;
  const long T = std_residuals.T;
  if (T < 4) throw DimensionError("jirak_block_threshold: need T >= 4");

  std::mt19937_64 rng = make_rng(seed, {stream::jirak_boot});
  std::uniform_int_distribution<long> start(1, T);
  ScaledPanel repl;
  repl.n = n;
  repl.T = T;
  repl.values.resize(static_cast<size_t>(n * T));
  repl.scales.assign(static_cast<size_t>(n), 1.0);

  std::vector<double> stats(static_cast<size_t>(B));
  for (long l = 0; l < B; ++l) {
    long col = 1;
    while (col <= T) {
      const long st = start(rng);
      for (long k = 0; k < block_len && col <= T; ++k, ++col) {
        const long src = (st - 1 + k) % T + 1;
        for (long j = 1; j <= n; ++j) {
          repl.values[static_cast<size_t>((j - 1) * T + (col - 1))] = std_residuals.at(j, src);
        }
      }
    }
    stats[static_cast<size_t>(l)] = jirak_statistic(repl, d_T).stat;
  }
  std::sort(stats.begin(), stats.end());
  return stats[static_cast<size_t>(quantile_rank(alpha, B) - 1)];
}

}  // namespace panelseg
