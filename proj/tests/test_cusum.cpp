#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "panelseg/cusum.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/panel.hpp"

using namespace panelseg;

namespace {

// Direct two-sum evaluation of the CUSUM at b on [s, e]; the library computes
// the same quantity from prefix sums.
double brute_cusum(const std::vector<double>& x, long s, long b, long e) {
  double head = 0.0, tail = 0.0;
  for (long t = s; t <= b; ++t) head += x[static_cast<size_t>(t - 1)];
  for (long t = b + 1; t <= e; ++t) tail += x[static_cast<size_t>(t - 1)];
  const double len = static_cast<double>(e - s + 1);
  const double nb = static_cast<double>(b - s + 1);
  const double na = static_cast<double>(e - b);
  return std::sqrt(na / (len * nb)) * head - std::sqrt(nb / (len * na)) * tail;
}

std::vector<double> row_of(const ScaledPanel& p, long j) {
  return std::vector<double>(p.row(j).begin(), p.row(j).end());
}

// From-scratch panel statistic at one (b, m): sort |CUSUM|s descending (ties
// by original index), then apply the cross-sectional contrast.
double brute_panel_stat(const ScaledPanel& p, long s, long b, long e, long m,
                        const DcMode& mode) {
  const long n = p.n;
  std::vector<std::pair<double, long>> keyed(static_cast<size_t>(n));
  for (long j = 1; j <= n; ++j) {
    keyed[static_cast<size_t>(j - 1)] = {std::fabs(brute_cusum(row_of(p, j), s, b, e)), j};
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b2) {
    if (a.first != b2.first) return a.first > b2.first;
    return a.second < b2.second;
  });
  double head = 0.0, tail = 0.0;
  for (long i = 0; i < n; ++i) {
    if (i < m) head += keyed[static_cast<size_t>(i)].first;
    else tail += keyed[static_cast<size_t>(i)].first;
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  const double contrast = head / dm - tail / (2.0 * dn - dm);
  if (mode.kind == DcMode::Kind::exponent) {
    return std::pow(dm * (2.0 * dn - dm) / (2.0 * dn), mode.phi) * contrast;
  }
  const double gamma = mode.gamma > 0.0 ? mode.gamma : (n == 1 ? 1.0 : std::log(dn));
  return (gamma + std::sqrt(dm * (2.0 * dn - dm) / (2.0 * dn))) * contrast;
}

struct BruteScan {
  double stat = -1.0;
  long b = 0;
  long m = 0;
};

BruteScan brute_scan(const ScaledPanel& p, long s, long e, const DcMode& mode, long d_T) {
  BruteScan best;
  for (long b = s + d_T + 1; b <= e - d_T - 1 && b < e; ++b) {
    for (long m = 1; m <= p.n; ++m) {
      const double v = brute_panel_stat(p, s, b, e, m, mode);
      if (v > best.stat) best = {v, b, m};
    }
  }
  return best;
}

ScaledPanel random_panel(long n, long T, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ScaledPanel p;
  p.n = n;
  p.T = T;
  p.values.resize(static_cast<size_t>(n * T));
  p.scales.assign(static_cast<size_t>(n), 1.0);
  for (double& v : p.values) v = nd(rng);
  return p;
}

}  // namespace

TEST_CASE("cusum of a constant series is zero") {
  std::vector<double> x(9, 3.7);
  for (double v : cusum_series(x, 1, 9)) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
  for (double v : cusum_series(x, 3, 7)) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("cusum of (1,1,0,0) at b=2 is 1") {
  std::vector<double> x{1.0, 1.0, 0.0, 0.0};
  std::vector<double> c = cusum_series(x, 1, 4);
  REQUIRE(c.size() == 3);
  CHECK(c[1] == doctest::Approx(1.0).epsilon(1e-15));  // sqrt(2/(4*2))*2 - 0
}

TEST_CASE("cusum matches the direct two-sum formula") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::vector<double> x(12);
  for (double& v : x) v = nd(rng);
  for (long s : {1L, 3L}) {
    const long e = s == 1 ? 12 : 10;
    std::vector<double> c = cusum_series(x, s, e);
    REQUIRE(c.size() == static_cast<size_t>(e - s));
    for (long b = s; b < e; ++b) {
      CHECK(c[static_cast<size_t>(b - s)] ==
            doctest::Approx(brute_cusum(x, s, b, e)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cusum rejects windows shorter than two points") {
  std::vector<double> x{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(cusum_series(x, 2, 2), DimensionError);
  CHECK_THROWS_AS(cusum_series(x, 1, 4), DimensionError);
}

TEST_CASE("cusum is invariant to a level shift") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> x(10), y(10);
  for (size_t i = 0; i < 10; ++i) {
    x[i] = nd(rng);
    y[i] = x[i] + 17.25;
  }
  std::vector<double> cx = cusum_series(x, 1, 10), cy = cusum_series(y, 1, 10);
  for (size_t i = 0; i < cx.size(); ++i) CHECK(cy[i] == doctest::Approx(cx[i]).epsilon(1e-10));
}

TEST_CASE("cusum of the reversed series is the negated reversed transform") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  std::vector<double> x(8);
  for (double& v : x) v = nd(rng);
  std::vector<double> r(x.rbegin(), x.rend());
  std::vector<double> cx = cusum_series(x, 1, 8), cr = cusum_series(r, 1, 8);
  for (size_t i = 0; i < cx.size(); ++i) {
    CHECK(cr[i] == doctest::Approx(-cx[cx.size() - 1 - i]).epsilon(1e-12));
  }
}

TEST_CASE("cusum scales linearly") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> x(10), y(10);
  for (size_t i = 0; i < 10; ++i) {
    x[i] = nd(rng);
    y[i] = 2.5 * x[i];
  }
  std::vector<double> cx = cusum_series(x, 1, 10), cy = cusum_series(y, 1, 10);
  for (size_t i = 0; i < cx.size(); ++i) CHECK(cy[i] == doctest::Approx(2.5 * cx[i]).epsilon(1e-12));
}

TEST_CASE("ordered cusums: singleton panel") {
  ScaledPanel p;
  p.n = 1;
  p.T = 4;
  p.values = {1.0, 1.0, 0.0, 0.0};
  p.scales = {1.0};
  OrderedCusums oc = ordered_abs_cusums(p, 1, 2, 4);
  REQUIRE(oc.sorted_abs.size() == 1);
  CHECK(oc.order[0] == 1);
  CHECK(oc.sorted_abs[0] == doctest::Approx(1.0));
  CHECK(oc.signs[0] == 1);
}

TEST_CASE("ordered cusums sort descending with index tie-break") {
  // Series 2 carries the big step, series 1 a small one, series 3 ties series 1.
  ScaledPanel p;
  p.n = 3;
  p.T = 4;
  p.scales = {1.0, 1.0, 1.0};
  p.values = {0.3, 0.3, 0.0, 0.0,   //
              0.9, 0.9, 0.0, 0.0,   //
              0.3, 0.3, 0.0, 0.0};
  OrderedCusums oc = ordered_abs_cusums(p, 1, 2, 4);
  CHECK(oc.order[0] == 2);
  CHECK(oc.order[1] == 1);  // tie with series 3 broken by smaller index
  CHECK(oc.order[2] == 3);
  CHECK(oc.sorted_abs[0] == doctest::Approx(0.9));
  CHECK(oc.sorted_abs[1] == doctest::Approx(0.3));
}

TEST_CASE("ordered cusums carry the sign of the underlying contrast") {
  ScaledPanel p;
  p.n = 2;
  p.T = 4;
  p.scales = {1.0, 1.0};
  p.values = {1.0, 1.0, 0.0, 0.0,   //
              0.0, 0.0, 1.0, 1.0};  // downward contrast -> negative CUSUM
  OrderedCusums oc = ordered_abs_cusums(p, 1, 2, 4);
  CHECK(oc.signs[0] * oc.signs[1] == -1);
}

TEST_CASE("ordered cusums validate indices") {
  ScaledPanel p;
  p.n = 1;
  p.T = 4;
  p.values = {1.0, 2.0, 3.0, 4.0};
  p.scales = {1.0};
  CHECK_THROWS_AS(ordered_abs_cusums(p, 1, 4, 4), DimensionError);
  CHECK_THROWS_AS(ordered_abs_cusums(p, 0, 2, 4), DimensionError);
  CHECK_THROWS_AS(ordered_abs_cusums(p, 1, 2, 5), DimensionError);
}

TEST_CASE("double cusum of a constant profile is zero") {
  std::vector<double> flat(6, 0.8);
  for (long m = 1; m <= 6; ++m) {
    CHECK(double_cusum(flat, m, DcMode::exponent(0.0)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(double_cusum(flat, m, DcMode::exponent(0.5)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(double_cusum(flat, m, DcMode::combined()) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("double cusum hand values at n=2") {
  std::vector<double> v{2.0, 0.0};
  // {1*3/4}^{1/2} * (2/1 - 0/3) = sqrt(3)
  CHECK(double_cusum(v, 1, DcMode::exponent(0.5)) ==
        doctest::Approx(1.7320508075688772).epsilon(1e-12));
  // m = n: empty tail sum, {2*2/4}^0 * (2+0)/2 = 1
  CHECK(double_cusum(v, 2, DcMode::exponent(0.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("combined statistic is gamma * D0 + D^1/2") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> v(5);
  for (double& x : v) x = ud(rng);
  std::sort(v.rbegin(), v.rend());
  for (long m = 1; m <= 5; ++m) {
    const double d0 = double_cusum(v, m, DcMode::exponent(0.0));
    const double dh = double_cusum(v, m, DcMode::exponent(0.5));
    CHECK(double_cusum(v, m, DcMode::combined()) ==
          doctest::Approx(std::log(5.0) * d0 + dh).epsilon(1e-12));
    CHECK(double_cusum(v, m, DcMode::combined(2.0)) ==
          doctest::Approx(2.0 * d0 + dh).epsilon(1e-12));
  }
}

TEST_CASE("double cusum validates its contract") {
  std::vector<double> v{1.0, 2.0};  // ascending: not a valid ordered profile
  CHECK_THROWS_AS(double_cusum(v, 1, DcMode::exponent(0.5)), DomainError);
  std::vector<double> ok{2.0, 1.0};
  CHECK_THROWS_AS(double_cusum(ok, 0, DcMode::exponent(0.5)), DomainError);
  CHECK_THROWS_AS(double_cusum(ok, 3, DcMode::exponent(0.5)), DomainError);
  CHECK_THROWS_AS(DcMode::exponent(1.5), DomainError);
}

TEST_CASE("double cusum matches the from-scratch formula on random panels") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<long> nd(1, 8), Td(4, 16);
  const DcMode modes[] = {DcMode::exponent(0.0), DcMode::exponent(0.5), DcMode::exponent(1.0),
                          DcMode::combined()};
  for (int rep = 0; rep < 25; ++rep) {
    const long n = nd(rng), T = Td(rng);
    ScaledPanel p = random_panel(n, T, rng);
    for (long b = 1; b < T; ++b) {
      OrderedCusums oc = ordered_abs_cusums(p, 1, b, T);
      for (long m = 1; m <= n; ++m) {
        for (const DcMode& mode : modes) {
          CHECK(double_cusum(oc.sorted_abs, m, mode) ==
                doctest::Approx(brute_panel_stat(p, 1, b, T, m, mode)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("scan recovers a shared noiseless step exactly") {
  const long n = 4, T = 20, eta = 7;
  ScaledPanel p;
  p.n = n;
  p.T = T;
  p.scales.assign(n, 1.0);
  p.values.assign(static_cast<size_t>(n * T), 0.0);
  for (long j = 1; j <= n; ++j)
    for (long t = eta + 1; t <= T; ++t) p.values[static_cast<size_t>((j - 1) * T + t - 1)] = 1.0;
  for (const DcMode& mode : {DcMode::exponent(0.0), DcMode::exponent(0.5), DcMode::combined()}) {
    CusumScanResult r = dc_scan(p, 1, T, mode, 0);
    CHECK(r.b_hat == eta);
    CHECK(r.stat > 0.0);
  }
}

TEST_CASE("scan of a constant panel is zero") {
  ScaledPanel p;
  p.n = 3;
  p.T = 12;
  p.scales.assign(3, 1.0);
  p.values.assign(36, 2.0);
  CusumScanResult r = dc_scan(p, 1, 12, DcMode::combined(), 2);
  CHECK(r.stat == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("scan equals the exhaustive double loop, argmax included") {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<long> nd(1, 5), Td(6, 14), dd(0, 2);
  const DcMode modes[] = {DcMode::exponent(0.0), DcMode::exponent(0.5), DcMode::combined()};
  for (int rep = 0; rep < 40; ++rep) {
    const long n = nd(rng), T = Td(rng), d_T = dd(rng);
    ScaledPanel p = random_panel(n, T, rng);
    for (const DcMode& mode : modes) {
      CusumScanResult got = dc_scan(p, 1, T, mode, d_T);
      BruteScan want = brute_scan(p, 1, T, mode, d_T);
      CHECK(got.stat == doctest::Approx(want.stat).epsilon(1e-12));
      CHECK(got.b_hat == want.b);
      CHECK(got.m_hat == want.m);
    }
  }
}

TEST_CASE("scan reports the m maximising the profile at b_hat") {
  std::mt19937_64 rng(44);
  ScaledPanel p = random_panel(4, 12, rng);
  CusumScanResult r = dc_scan(p, 1, 12, DcMode::exponent(0.5), 1);
  OrderedCusums oc = ordered_abs_cusums(p, 1, r.b_hat, 12);
  double best = -1.0;
  long best_m = 0;
  for (long m = 1; m <= 4; ++m) {
    const double v = double_cusum(oc.sorted_abs, m, DcMode::exponent(0.5));
    if (v > best) {
      best = v;
      best_m = m;
    }
  }
  CHECK(r.m_hat == best_m);
  CHECK(r.stat == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("scan rejects windows with an empty candidate set") {
  ScaledPanel p;
  p.n = 2;
  p.T = 8;
  p.scales.assign(2, 1.0);
  p.values.assign(16, 0.0);
  CHECK_THROWS_AS(dc_scan(p, 1, 8, DcMode::combined(), 4), DimensionError);
  CHECK_NOTHROW(dc_scan(p, 1, 8, DcMode::combined(), 3));
}

TEST_CASE("projection vector reproduces the double cusum") {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<long> nd(1, 10), Td(6, 30);
  std::uniform_real_distribution<double> sd(0.3, 3.0);
  std::normal_distribution<double> xd;
  const double phis[] = {0.0, 0.25, 0.5, 1.0};
  for (int rep = 0; rep < 100; ++rep) {
    const long n = nd(rng), T = Td(rng);
    PanelData raw(n, T);
    for (double& v : raw.values) v = xd(rng) + 0.4 * xd(rng);
    std::vector<double> scales(static_cast<size_t>(n));
    for (double& s : scales) s = sd(rng);
    ScaledPanel p = standardize(raw, scales);
    std::uniform_int_distribution<long> bd(1, T - 1), md(1, n);
    const long b = bd(rng), m = md(rng);
    const double phi = phis[static_cast<size_t>(rep) % 4];

    OrderedCusums oc = ordered_abs_cusums(p, 1, b, T);
    std::vector<double> proj = projection_vector(oc, scales, m, phi);
    std::vector<double> series(static_cast<size_t>(T));
    for (long t = 1; t <= T; ++t) {
      double acc = 0.0;
      for (long j = 1; j <= n; ++j) acc += raw.at(j, t) * proj[static_cast<size_t>(j - 1)];
      series[static_cast<size_t>(t - 1)] = acc;
    }
    const double at_b = cusum_series(series, 1, T)[static_cast<size_t>(b - 1)];
    CHECK(at_b == doctest::Approx(double_cusum(oc.sorted_abs, m, DcMode::exponent(phi)))
                      .epsilon(1e-8));
  }
}

TEST_CASE("projection vector formula read-offs") {
  ScaledPanel p;
  p.n = 1;
  p.T = 4;
  p.values = {1.0, 1.0, 0.0, 0.0};
  p.scales = {2.0};
  OrderedCusums oc = ordered_abs_cusums(p, 1, 2, 4);
  std::vector<double> proj = projection_vector(oc, {2.0}, 1, 0.0);
  REQUIRE(proj.size() == 1);
  // n=1, m=1, phi=0: weight = sign * (1/sigma) * {1*1/2}^0 * (1/1) = +-1/2.
  CHECK(std::fabs(proj[0]) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("projection vector with m=n uses tail weight 1/n") {
  std::mt19937_64 rng(66);
  ScaledPanel p = random_panel(3, 10, rng);
  OrderedCusums oc = ordered_abs_cusums(p, 1, 5, 10);
  std::vector<double> proj = projection_vector(oc, {1.0, 1.0, 1.0}, 3, 0.0);
  // All series in the head set: weight (1/m) = 1/3 with unit scale and phi=0.
  for (double w : proj) CHECK(std::fabs(w) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("projection vector refuses the combined mode") {
  std::mt19937_64 rng(77);
  ScaledPanel p = random_panel(2, 8, rng);
  OrderedCusums oc = ordered_abs_cusums(p, 1, 4, 8);
  CHECK_THROWS_AS(projection_vector(oc, {1.0, 1.0}, 1, 2.0), DomainError);
  CHECK_THROWS_AS(projection_vector(oc, {1.0, 1.0}, 1, -0.5), DomainError);
}
