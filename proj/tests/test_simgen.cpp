#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "panelseg/errors.hpp"
#include "panelseg/simgen.hpp"

using namespace panelseg;

namespace {

double cross_corr(const PanelData& p, long j1, long j2) {
  const long T = p.T;
  double m1 = 0, m2 = 0;
  for (long t = 1; t <= T; ++t) {
    m1 += p.at(j1, t);
    m2 += p.at(j2, t);
  }
  m1 /= static_cast<double>(T);
  m2 /= static_cast<double>(T);
  double num = 0, d1 = 0, d2 = 0;
  for (long t = 1; t <= T; ++t) {
    const double a = p.at(j1, t) - m1, b = p.at(j2, t) - m2;
    num += a * b;
    d1 += a * a;
    d2 += b * b;
  }
  return num / std::sqrt(d1 * d2);
}

// Share of total variance carried by the leading covariance eigenvalue,
// via power iteration (the trace supplies the denominator).
double top_eigen_share(const PanelData& p) {
  const long n = p.n, T = p.T;
  std::vector<double> mean(static_cast<size_t>(n), 0.0);
  for (long j = 1; j <= n; ++j) {
    for (long t = 1; t <= T; ++t) mean[static_cast<size_t>(j - 1)] += p.at(j, t);
    mean[static_cast<size_t>(j - 1)] /= static_cast<double>(T);
  }
  std::vector<double> S(static_cast<size_t>(n * n), 0.0);
  for (long a = 1; a <= n; ++a) {
    for (long b = a; b <= n; ++b) {
      double acc = 0.0;
      for (long t = 1; t <= T; ++t) {
        acc += (p.at(a, t) - mean[static_cast<size_t>(a - 1)]) *
               (p.at(b, t) - mean[static_cast<size_t>(b - 1)]);
      }
      acc /= static_cast<double>(T);
      S[static_cast<size_t>((a - 1) * n + b - 1)] = acc;
      S[static_cast<size_t>((b - 1) * n + a - 1)] = acc;
    }
  }
  double trace = 0.0;
  for (long a = 0; a < n; ++a) trace += S[static_cast<size_t>(a * n + a)];
  std::vector<double> v(static_cast<size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> w(static_cast<size_t>(n));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (long a = 0; a < n; ++a) {
      double acc = 0.0;
      for (long b = 0; b < n; ++b) acc += S[static_cast<size_t>(a * n + b)] * v[static_cast<size_t>(b)];
      w[static_cast<size_t>(a)] = acc;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    lambda = norm;
    for (long a = 0; a < n; ++a) v[static_cast<size_t>(a)] = w[static_cast<size_t>(a)] / norm;
  }
  return lambda / trace;
}

}  // namespace

TEST_CASE("zero innovation scale gives a zero panel") {
  NoiseModelSpec spec;
  spec.n = 8;
  spec.T = 30;
  spec.noise_scale = 0.0;
  PanelData p = gen_noise(spec, 1);
  for (double v : p.values) CHECK(v == 0.0);

  spec.model = NoiseModelSpec::Model::n2;
  spec.rho_h = 0.5;
  PanelData q = gen_noise(spec, 1);
  for (double v : q.values) CHECK(v == 0.0);
}

TEST_CASE("noise panel has the requested shape and is seed-reproducible") {
  NoiseModelSpec spec;
  spec.n = 5;
  spec.T = 40;
  PanelData a = gen_noise(spec, 99);
  PanelData b = gen_noise(spec, 99);
  PanelData c = gen_noise(spec, 100);
  CHECK(a.n == 5);
  CHECK(a.T == 40);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("spatial MA decays with cross-sectional distance") {
  // Averaged over seeds, corr(series 1, series 2) must dominate
  // corr(series 1, series 50): the MA weights shrink in |j - j'|.
  double near = 0, far = 0;
  NoiseModelSpec spec;
  spec.n = 60;
  spec.T = 500;
  for (int seed = 0; seed < 50; ++seed) {
    PanelData p = gen_noise(spec, 200 + static_cast<std::uint64_t>(seed));
    near += cross_corr(p, 1, 2);
    far += cross_corr(p, 1, 50);
  }
  CHECK(near / 50.0 > far / 50.0);
  CHECK(near / 50.0 > 0.3);  // adjacent series are strongly linked at rho = 0.2
}

TEST_CASE("factor model concentrates variance in the leading eigenvalue") {
  NoiseModelSpec base;
  base.n = 60;
  base.T = 500;
  NoiseModelSpec factor = base;
  factor.model = NoiseModelSpec::Model::n2;
  factor.rho_h = 0.9;
  int factor_wins = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const std::uint64_t s = 300 + static_cast<std::uint64_t>(seed);
    if (top_eigen_share(gen_noise(factor, s)) > top_eigen_share(gen_noise(base, s))) {
      ++factor_wins;
    }
  }
  CHECK(factor_wins > 25);
}

TEST_CASE("invalid noise specs are rejected") {
  NoiseModelSpec spec;
  spec.n = 4;
  spec.T = 20;
  spec.rho = 0.0;
  CHECK_THROWS_AS(gen_noise(spec, 1), DomainError);
  spec.rho = 0.2;
  spec.model = NoiseModelSpec::Model::n2;
  spec.rho_h = 1.5;  // sigma_v = 0.5 sqrt(1 - rho_h^2) must stay real
  CHECK_THROWS_AS(gen_noise(spec, 1), DomainError);
  spec.rho_h = 0.5;
  spec.n = 0;
  CHECK_THROWS_AS(gen_noise(spec, 1), DimensionError);
}

TEST_CASE("empty signal plan is the zero matrix") {
  SignalSpec spec;
  PanelData s = gen_signal(spec, 4, 12, 7);
  CHECK(s.n == 4);
  CHECK(s.T == 12);
  for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("degenerate jitter gives exact jump sizes") {
  SignalSpec spec;
  spec.jitter = 0.0;
  ChangeSpec cp;
  cp.eta = 5;
  cp.m = 6;  // all series
  cp.delta = 0.8;
  spec.change_points.push_back(cp);
  SignalTruth truth;
  PanelData s = gen_signal(spec, 6, 10, 3, &truth);
  REQUIRE(truth.changes.size() == 1);
  CHECK(truth.changes[0].eta == 5);
  CHECK(truth.changes[0].members.size() == 6);
  for (long j = 1; j <= 6; ++j) {
    for (long t = 1; t <= 5; ++t) CHECK(s.at(j, t) == 0.0);
    for (long t = 6; t <= 10; ++t) CHECK(std::fabs(s.at(j, t)) == doctest::Approx(0.8).epsilon(1e-15));
  }
}

TEST_CASE("realized magnitudes stay inside the jitter band") {
  SignalSpec spec;
  ChangeSpec cp;
  cp.eta = 20;
  cp.m = 10;
  cp.delta = 1.0;
  spec.change_points.push_back(cp);
  SignalTruth truth;
  gen_signal(spec, 25, 50, 11, &truth);
  REQUIRE(truth.changes.size() == 1);
  CHECK(truth.changes[0].members.size() == 10);
  for (double d : truth.changes[0].deltas) {
    CHECK(std::fabs(d) >= 0.75);
    CHECK(std::fabs(d) <= 1.25);
  }
  for (long j : truth.changes[0].members) {
    CHECK(j >= 1);
    CHECK(j <= 25);
  }
  CHECK(std::is_sorted(truth.changes[0].members.begin(), truth.changes[0].members.end()));
}

TEST_CASE("jumps accumulate across change-points") {
  SignalSpec spec;
  spec.jitter = 0.0;
  ChangeSpec c1, c2;
  c1.eta = 3;
  c1.m = 1;
  c1.delta = 1.0;
  c1.pi = {1};
  c2.eta = 6;
  c2.m = 1;
  c2.delta = 0.5;
  c2.pi = {1};
  spec.change_points = {c1, c2};
  SignalTruth truth;
  PanelData s = gen_signal(spec, 2, 9, 5, &truth);
  const double first = s.at(1, 4);
  const double second = s.at(1, 7) - s.at(1, 4);
  CHECK(std::fabs(first) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs(second) == doctest::Approx(0.5).epsilon(1e-15));
  for (long t = 1; t <= 9; ++t) CHECK(s.at(2, t) == 0.0);  // series 2 untouched
}

TEST_CASE("explicit affected sets are honoured") {
  SignalSpec spec;
  ChangeSpec cp;
  cp.eta = 4;
  cp.m = 2;
  cp.delta = 1.0;
  cp.pi = {2, 5};
  spec.change_points.push_back(cp);
  SignalTruth truth;
  PanelData s = gen_signal(spec, 6, 8, 13, &truth);
  CHECK(truth.changes[0].members == std::vector<long>{2, 5});
  for (long j : {1L, 3L, 4L, 6L}) {
    for (long t = 1; t <= 8; ++t) CHECK(s.at(j, t) == 0.0);
  }
}

TEST_CASE("invalid signal specs are rejected") {
  SignalSpec spec;
  ChangeSpec cp;
  cp.eta = 4;
  cp.m = 9;  // more series than the panel has
  cp.delta = 1.0;
  spec.change_points.push_back(cp);
  CHECK_THROWS_AS(gen_signal(spec, 4, 10, 1), DomainError);
}

TEST_CASE("rand index hand values") {
  std::vector<long> t1{1, 2, 3, 4}, e1{1, 2, 3, 4};
  CHECK(rand_index(t1, e1, 10) == doctest::Approx(1.0));
  std::vector<long> t2{1, 2}, e2{3, 4};
  CHECK(rand_index(t2, e2, 4) == doctest::Approx(0.0));
  std::vector<long> t3{1, 2, 3, 4}, e3{3, 4, 5, 6};
  CHECK(rand_index(t3, e3, 10) == doctest::Approx(0.6));  // (2 TP + 4 TN) / 10
}

TEST_CASE("rand index is symmetric") {
  std::vector<long> a{1, 3, 7}, b{2, 3, 8, 9};
  CHECK(rand_index(a, b, 12) == rand_index(b, a, 12));
}
