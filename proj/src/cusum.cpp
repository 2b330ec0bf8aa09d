// CUSUM operator, ordered CUSUMs, double CUSUM statistics and the (b, m) scan.

#include "panelseg/cusum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "panelseg/errors.hpp"

namespace panelseg {

DcMode DcMode::exponent(double phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) {
    throw DomainError("exponent mode needs 0 <= phi <= 1, got " + std::to_string(phi));
  }
  DcMode m;
  m.kind = Kind::exponent;
  m.phi = phi;
  return m;
}

DcMode DcMode::combined(double gamma) {
  DcMode m;
  m.kind = Kind::combined;
  m.gamma = gamma;
  return m;
}

double resolve_gamma(const DcMode& mode, long n) {
  if (mode.kind != DcMode::Kind::combined) throw InternalError("resolve_gamma: not combined mode");
  if (mode.gamma > 0.0) return mode.gamma;
  if (n < 2) return 1.0;
  return std::log(static_cast<double>(n));
}

std::vector<double> cusum_series(std::span<const double> x, long s, long e) {
  long T = static_cast<long>(x.size());
  if (s < 1 || e > T || e - s + 1 < 2) {
    throw DimensionError("cusum window [" + std::to_string(s) + ", " + std::to_string(e) +
                         "] invalid for series of length " + std::to_string(T));
  }
  const double L = static_cast<double>(e - s + 1);
  std::vector<double> out(static_cast<size_t>(e - s));
  double head = 0.0;
  double total = 0.0;
  for (long t = s; t <= e; ++t) total += x[static_cast<size_t>(t - 1)];
  for (long b = s; b < e; ++b) {
    head += x[static_cast<size_t>(b - 1)];
    const double nl = static_cast<double>(b - s + 1);
    const double nr = static_cast<double>(e - b);
    out[static_cast<size_t>(b - s)] =
        std::sqrt(nr / (L * nl)) * head - std::sqrt(nl / (L * nr)) * (total - head);
  }
  return out;
}

PanelPrefix PanelPrefix::build(const double* values, long n, long T) {
  PanelPrefix pp;
  pp.n = n;
  pp.T = T;
  pp.P.resize(static_cast<size_t>(n * (T + 1)));
  for (long j = 0; j < n; ++j) {
    const double* row = values + j * T;
    double* out = pp.P.data() + j * (T + 1);
    out[0] = 0.0;
    for (long t = 0; t < T; ++t) out[t + 1] = out[t] + row[t];
  }
  pp.Pt.resize(static_cast<size_t>((T + 1) * n));
  for (long t = 0; t <= T; ++t)
    for (long j = 0; j < n; ++j)
      pp.Pt[static_cast<size_t>(t * n + j)] = pp.P[static_cast<size_t>(j * (T + 1) + t)];
  return pp;
}

PanelPrefix PanelPrefix::build(const ScaledPanel& panel) {
  return build(panel.values.data(), panel.n, panel.T);
}

namespace {

// CUSUM of series j at (s, b, e) from prefix sums.
inline double cusum_at(const PanelPrefix& pp, long j, long s, long b, long e) {
  const double L = static_cast<double>(e - s + 1);
  const double nl = static_cast<double>(b - s + 1);
  const double nr = static_cast<double>(e - b);
  return std::sqrt(nr / (L * nl)) * pp.seg(j, s, b) - std::sqrt(nl / (L * nr)) * pp.seg(j, b + 1, e);
}

void check_window(const ScaledPanel& panel, long s, long b, long e) {
  if (s < 1 || e > panel.T || !(s <= b && b < e)) {
    throw DimensionError("indices (s=" + std::to_string(s) + ", b=" + std::to_string(b) +
                         ", e=" + std::to_string(e) + ") out of range for T = " +
                         std::to_string(panel.T));
  }
}

}  // namespace

OrderedCusums ordered_abs_cusums(const ScaledPanel& panel, long s, long b, long e) {
  check_window(panel, s, b, e);
  PanelPrefix pp = PanelPrefix::build(panel);
  const long n = panel.n;
  std::vector<double> x(static_cast<size_t>(n));
  for (long j = 1; j <= n; ++j) x[static_cast<size_t>(j - 1)] = cusum_at(pp, j, s, b, e);

  OrderedCusums oc;
  oc.order.resize(static_cast<size_t>(n));
  std::iota(oc.order.begin(), oc.order.end(), 1);
  std::sort(oc.order.begin(), oc.order.end(), [&](long a, long c) {
    double fa = std::fabs(x[static_cast<size_t>(a - 1)]);
    double fc = std::fabs(x[static_cast<size_t>(c - 1)]);
    if (fa != fc) return fa > fc;
    return a < c;  // tie: smaller original index first
  });
  oc.sorted_abs.resize(static_cast<size_t>(n));
  oc.signs.resize(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    double v = x[static_cast<size_t>(oc.order[static_cast<size_t>(i)] - 1)];
    oc.sorted_abs[static_cast<size_t>(i)] = std::fabs(v);
    oc.signs[static_cast<size_t>(i)] = v < 0.0 ? -1 : +1;
  }
  return oc;
}

std::vector<double> mode_multipliers(long n, const DcMode& mode) {
  std::vector<double> mult(static_cast<size_t>(n));
  const double twon = 2.0 * static_cast<double>(n);
  if (mode.kind == DcMode::Kind::exponent) {
    if (!(mode.phi >= 0.0 && mode.phi <= 1.0)) {
      throw DomainError("exponent mode needs 0 <= phi <= 1, got " + std::to_string(mode.phi));
    }
    for (long m = 1; m <= n; ++m) {
      double w = static_cast<double>(m) * (twon - static_cast<double>(m)) / twon;
      mult[static_cast<size_t>(m - 1)] = mode.phi == 0.0 ? 1.0 : std::pow(w, mode.phi);
    }
  } else {
    const double gamma = resolve_gamma(mode, n);
    if (!(gamma > 0.0)) throw DomainError("combined mode needs gamma > 0");
    for (long m = 1; m <= n; ++m) {
      double w = static_cast<double>(m) * (twon - static_cast<double>(m)) / twon;
      mult[static_cast<size_t>(m - 1)] = gamma + std::sqrt(w);
    }
  }
  return mult;
}

double double_cusum(std::span<const double> sorted_abs, long m, const DcMode& mode) {
  const long n = static_cast<long>(sorted_abs.size());
  if (n < 1) throw DimensionError("double_cusum: empty input");
  if (m < 1 || m > n) {
    throw DomainError("double_cusum: m = " + std::to_string(m) + " outside 1.." + std::to_string(n));
  }
  for (long i = 1; i < n; ++i) {
    if (sorted_abs[static_cast<size_t>(i)] > sorted_abs[static_cast<size_t>(i - 1)]) {
      throw DomainError("double_cusum: input not descending at position " + std::to_string(i + 1));
    }
  }
  double head = 0.0;
  for (long i = 0; i < m; ++i) head += sorted_abs[static_cast<size_t>(i)];
  double tail = 0.0;
  for (long i = m; i < n; ++i) tail += sorted_abs[static_cast<size_t>(i)];
  const double diff = head / static_cast<double>(m) -
                      tail / (2.0 * static_cast<double>(n) - static_cast<double>(m));
  return mode_multipliers(n, mode)[static_cast<size_t>(m - 1)] * diff;
}

void scan_window(const PanelPrefix& pp, long s, long e, long d_T,
                 std::span<const std::vector<double>> mults,
                 ScanWorkspace& ws, std::span<ScanBest> bests) {
  const long n = pp.n;
  const long b_lo = first_candidate(s, d_T);
  const long b_hi = std::min(last_candidate(e, d_T), e - 1);
  if (b_lo > b_hi) {
    throw DimensionError("window [" + std::to_string(s) + ", " + std::to_string(e) +
                         "] too short for trim " + std::to_string(d_T));
  }
  ws.absx.resize(static_cast<size_t>(n));
  const double twon = 2.0 * static_cast<double>(n);
  const size_t nm = mults.size();

  // Prune tables.  With absx sorted descending, head_sum(m) <= H_m :=
  // min(m * maxabs, sqrt(m) * l2, sum) (Cauchy-Schwarz for the middle term),
  // and D_m / mult[m] = head_sum/m - (sum - head_sum)/(2n - m) is increasing
  // in head_sum, so g_m = H_m/m - (sum - H_m)/(2n - m) bounds it.  A candidate
  // whose cap max_m mult[m] * g_m cannot beat the running best of any mode
  // skips the sort entirely.  maxabs/l2/sum come from the unsorted pass.
  ws.sqrt_m.resize(static_cast<size_t>(n));
  ws.inv_m.resize(static_cast<size_t>(n));
  ws.inv_tail.resize(static_cast<size_t>(n));
  for (long m = 1; m <= n; ++m) {
    ws.sqrt_m[static_cast<size_t>(m - 1)] = std::sqrt(static_cast<double>(m));
    ws.inv_m[static_cast<size_t>(m - 1)] = 1.0 / static_cast<double>(m);
    ws.inv_tail[static_cast<size_t>(m - 1)] = 1.0 / (twon - static_cast<double>(m));
  }
  // suffix_max[mi][m-1] = max over m' >= m of mult[m'], for the pop-loop stop rule.
  ws.suffix_max.resize(nm * static_cast<size_t>(n));
  for (size_t mi = 0; mi < nm; ++mi) {
    double* sm = ws.suffix_max.data() + mi * static_cast<size_t>(n);
    const std::vector<double>& mult = mults[mi];
    sm[n - 1] = mult[static_cast<size_t>(n - 1)];
    for (long m = n - 1; m >= 1; --m)
      sm[m - 1] = std::max(mult[static_cast<size_t>(m - 1)], sm[m]);
  }

  const double L = static_cast<double>(e - s + 1);
  const double* row_s = pp.Pt.data() + (s - 1) * n;
  const double* row_e = pp.Pt.data() + e * n;
  for (long b = b_lo; b <= b_hi; ++b) {
    const double nl = static_cast<double>(b - s + 1);
    const double nr = static_cast<double>(e - b);
    const double cl = std::sqrt(nr / (L * nl));
    const double cr = std::sqrt(nl / (L * nr));
    const double* row_b = pp.Pt.data() + b * n;
    double maxabs = 0.0;
    double sqsum = 0.0;
    double sum = 0.0;
    for (long j = 0; j < n; ++j) {
      const double head = row_b[j] - row_s[j];
      const double tail = row_e[j] - row_b[j];
      const double a = std::fabs(cl * head - cr * tail);
      ws.absx[static_cast<size_t>(j)] = a;
      if (a > maxabs) maxabs = a;
      sqsum += a * a;
      sum += a;
    }
    const double l2 = std::sqrt(sqsum);
    // Early exit as soon as any mode's cap can beat its best; the 1e-12 slack
    // absorbs the rounding difference between cap and the exact stat.
    bool viable = false;
    for (long m = 1; m <= n && !viable; ++m) {
      const size_t i = static_cast<size_t>(m - 1);
      double H = std::min(static_cast<double>(m) * maxabs, ws.sqrt_m[i] * l2);
      if (H > sum) H = sum;
      const double g = H * ws.inv_m[i] - (sum - H) * ws.inv_tail[i];
      for (size_t mi = 0; mi < nm; ++mi) {
        if (mults[mi][i] * g * (1.0 + 1e-12) > bests[mi].stat) {
          viable = true;
          break;
        }
      }
    }
    if (!viable) continue;
    ++ws.eval_count;
    // Pop the |CUSUM|s in descending order off a max-heap.  For any m' beyond
    // the pops so far, stat(m') <= suffix_max[m'] * head_mean(m) because the
    // head mean only decreases, so popping stops early once no mode can still
    // improve -- typically after a small fraction of n.
    std::make_heap(ws.absx.begin(), ws.absx.end());
    double head = 0.0;
    for (long m = 1; m <= n; ++m) {
      std::pop_heap(ws.absx.begin(), ws.absx.end() - (m - 1));
      head += ws.absx[static_cast<size_t>(n - m)];
      const size_t i = static_cast<size_t>(m - 1);
      const double diff = head * ws.inv_m[i] - (sum - head) * ws.inv_tail[i];
      for (size_t mi = 0; mi < nm; ++mi) {
        const double val = mults[mi][i] * diff;
        if (val > bests[mi].stat) {
          bests[mi].stat = val;
          bests[mi].b = b;
          bests[mi].m = m;
        }
      }
      if (m == n) break;
      const double head_mean = head * ws.inv_m[i];
      bool more = false;
      for (size_t mi = 0; mi < nm; ++mi) {
        if (ws.suffix_max[mi * static_cast<size_t>(n) + static_cast<size_t>(m)] * head_mean *
                (1.0 + 1e-12) > bests[mi].stat) {
          more = true;
          break;
        }
      }
      if (!more) break;
    }
  }
}

CusumScanResult dc_scan(const ScaledPanel& panel, long s, long e, const DcMode& mode, long d_T) {
  if (s < 1 || e > panel.T || s >= e) {
    throw DimensionError("scan window [" + std::to_string(s) + ", " + std::to_string(e) +
                         "] invalid for T = " + std::to_string(panel.T));
  }
  if (d_T < 0) throw DomainError("trim d_T must be >= 0");
  if (e - s <= 2 * d_T + 1) {
    throw DimensionError("window [" + std::to_string(s) + ", " + std::to_string(e) +
                         "] too short for trim " + std::to_string(d_T) +
                         " (empty candidate set)");
  }
  PanelPrefix pp = PanelPrefix::build(panel);
  std::vector<std::vector<double>> mults{mode_multipliers(panel.n, mode)};
  std::vector<ScanBest> bests(1);
  ScanWorkspace ws;
  scan_window(pp, s, e, d_T, mults, ws, bests);

  CusumScanResult res;
  res.stat = bests[0].stat;
  res.b_hat = bests[0].b;
  res.m_hat = bests[0].m;
  OrderedCusums oc = ordered_abs_cusums(panel, s, res.b_hat, e);
  res.order = std::move(oc.order);
  res.signs = std::move(oc.signs);
  return res;
}

std::vector<double> projection_vector(const OrderedCusums& oc,
                                      const std::vector<double>& scales,
                                      long m, double phi) {
  const long n = static_cast<long>(oc.order.size());
  if (n < 1) throw DimensionError("projection_vector: empty ordering");
  if (static_cast<long>(scales.size()) != n) {
    throw DimensionError("projection_vector: scales length mismatch");
  }
  if (m < 1 || m > n) throw DomainError("projection_vector: m outside 1..n");
  if (!(phi >= 0.0 && phi <= 1.0)) {
    throw DomainError("projection_vector: exponent mode only (0 <= phi <= 1)");
  }
  const double twon = 2.0 * static_cast<double>(n);
  const double w = std::pow(static_cast<double>(m) * (twon - static_cast<double>(m)) / twon, phi);
  const double head_c = w / static_cast<double>(m);
  const double tail_c = w / (twon - static_cast<double>(m));
  std::vector<double> p(static_cast<size_t>(n), 0.0);
  for (long i = 0; i < n; ++i) {
    const long j = oc.order[static_cast<size_t>(i)];
    const double sgn = static_cast<double>(oc.signs[static_cast<size_t>(i)]);
    const double coef = (i < m) ? head_c : -tail_c;
    p[static_cast<size_t>(j - 1)] = sgn * coef / scales[static_cast<size_t>(j - 1)];
  }
  return p;
}

}  // namespace panelseg
