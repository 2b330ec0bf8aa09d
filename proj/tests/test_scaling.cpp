#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "panelseg/errors.hpp"
#include "panelseg/scaling.hpp"

using namespace panelseg;

namespace {

std::vector<double> iid_normal(long T, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sd);
  std::vector<double> x(static_cast<size_t>(T));
  for (double& v : x) v = nd(rng);
  return x;
}

std::vector<double> sample_autocov(const std::vector<double>& e, long lags) {
  const long T = static_cast<long>(e.size());
  std::vector<double> c(static_cast<size_t>(lags + 1), 0.0);
  for (long k = 0; k <= lags; ++k) {
    double acc = 0.0;
    for (long t = 0; t + k < T; ++t) acc += e[static_cast<size_t>(t)] * e[static_cast<size_t>(t + k)];
    c[static_cast<size_t>(k)] = acc / static_cast<double>(T);
  }
  return c;
}

}  // namespace

TEST_CASE("default tree depth formula") {
  // floor(log2(ln T + 1)): 2 over the simulation-scale range, growing slowly.
  CHECK(default_tree_depth(100) == 2);
  CHECK(default_tree_depth(250) == 2);
  CHECK(default_tree_depth(10) == 1);
  CHECK(default_tree_depth(5000) == 3);
}

TEST_CASE("residuals of a constant series vanish") {
  std::vector<double> x(12, 4.2);
  for (double r : estimate_residuals(x, 1)) CHECK(r == doctest::Approx(0.0).epsilon(1e-14));
  for (double r : estimate_residuals(x, 3)) CHECK(r == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("one split removes a clean step exactly") {
  std::vector<double> x{1.0, 1.0, 0.0, 0.0};
  std::vector<double> r = estimate_residuals(x, 1);
  REQUIRE(r.size() == 4);
  for (double v : r) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("noiseless split lands on the true step") {
  // The residual tree picks the argmax of the plain CUSUM; with one big step
  // and no noise the leaf boundary must be the step itself, so a piecewise
  // constant series is annihilated.
  std::vector<double> x(30, -1.5);
  for (size_t t = 18; t < 30; ++t) x[t] = 2.0;
  std::vector<double> r = estimate_residuals(x, 1);
  for (double v : r) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("leaf segments are mean-zero after the tree pass") {
  std::vector<double> x = iid_normal(64, 17);
  std::vector<double> r = estimate_residuals(x, 2);
  // Depth 2 yields up to 4 leaves; whatever the split points were, the whole
  // series sums to zero (every leaf was demeaned).
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  CHECK(total == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("residual estimation validates input") {
  std::vector<double> x{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(estimate_residuals(x, 1), DimensionError);
  std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(estimate_residuals(y, 0), DomainError);
}

TEST_CASE("flat-top window values") {
  CHECK(flat_top_weight(0.25) == 1.0);
  CHECK(flat_top_weight(0.75) == 0.5);
  CHECK(flat_top_weight(-1.2) == 0.0);
  CHECK(flat_top_weight(0.5) == 1.0);
  CHECK(flat_top_weight(1.0) == 0.0);
}

TEST_CASE("flat-top window is even") {
  for (double t : {0.1, 0.3, 0.55, 0.7, 0.99, 1.4}) {
    CHECK(flat_top_weight(t) == flat_top_weight(-t));
  }
}

TEST_CASE("white-noise identity: zero autocovariance beyond lag 0") {
  // A single spike has exact zero sample autocovariance at every positive lag,
  // so the kernel sum collapses to c(0).
  const long T = 16;
  std::vector<double> e(static_cast<size_t>(T), 0.0);
  e[0] = 4.0;  // c(0) = 16/16 = 1
  LrvResult r = long_run_variance(e);
  CHECK(r.sigma2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bandwidth rule follows the documented stopping criterion") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> e(200);
  double prev = 0.0;
  for (double& v : e) {
    prev = 0.8 * prev + nd(rng);
    v = prev;
  }
  LrvResult r = long_run_variance(e);

  const long T = 200;
  const long cap = std::max<long>(1, T / 4 - 3);
  std::vector<double> c = sample_autocov(e, std::min<long>(T - 1, cap + 3));
  const double bound = 1.4 * std::sqrt(std::log10(static_cast<double>(T)) / static_cast<double>(T));
  long tau = cap;
  for (long cand = 1; cand <= cap; ++cand) {
    bool ok = true;
    for (long k = 1; k <= 3; ++k) {
      if (cand + k < static_cast<long>(c.size()) &&
          std::fabs(c[static_cast<size_t>(cand + k)] / c[0]) >= bound) {
        ok = false;
        break;
      }
    }
    if (ok) {
      tau = cand;
      break;
    }
  }
  CHECK(r.tau == tau);
  CHECK(r.tau >= 1);
}

TEST_CASE("alternating series triggers the c(0)/2 floor") {
  // c(k) ~ (-1)^k c(0): the flat-top sum goes negative, the floor engages.
  std::vector<double> e(64);
  for (size_t t = 0; t < e.size(); ++t) e[t] = (t % 2 == 0) ? 1.0 : -1.0;
  LrvResult r = long_run_variance(e);
  CHECK(r.sigma2 == doctest::Approx(0.5).epsilon(1e-12));  // c(0) = 1
}

TEST_CASE("iid normal long-run variance concentrates around 1") {
  int inside = 0;
  for (int seed = 0; seed < 200; ++seed) {
    std::vector<double> e = iid_normal(500, 1000 + static_cast<std::uint64_t>(seed));
    LrvResult r = long_run_variance(e);
    if (r.sigma2 >= 0.5 && r.sigma2 <= 1.5) ++inside;
  }
  CHECK(inside >= 190);  // >= 95% of 200
}

TEST_CASE("long-run variance rejects degenerate input") {
  std::vector<double> z(32, 0.0);
  CHECK_THROWS_AS(long_run_variance(z), DegenerateError);
  std::vector<double> s{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(long_run_variance(s), DimensionError);
}

TEST_CASE("variance estimate scales quadratically") {
  std::vector<double> e = iid_normal(256, 7);
  std::vector<double> e3(e.size());
  for (size_t i = 0; i < e.size(); ++i) e3[i] = 3.0 * e[i];
  LrvResult a = long_run_variance(e);
  LrvResult b = long_run_variance(e3);
  CHECK(b.sigma2 == doctest::Approx(9.0 * a.sigma2).epsilon(1e-10));
}

TEST_CASE("per-series scales recover relative variances") {
  const long n = 3, T = 500;
  PanelData p(n, T);
  const double sds[] = {1.0, 2.0, 3.0};
  for (long j = 1; j <= n; ++j) {
    std::vector<double> x = iid_normal(T, 40 + static_cast<std::uint64_t>(j), sds[j - 1]);
    for (long t = 1; t <= T; ++t) p.at(j, t) = x[static_cast<size_t>(t - 1)];
  }
  ScalingEstimate est = estimate_scales(p, 1);
  REQUIRE(est.sigma2.size() == 3);
  CHECK(est.sigma2[1] / est.sigma2[0] == doctest::Approx(4.0).epsilon(0.5));
  CHECK(est.sigma2[2] / est.sigma2[0] == doctest::Approx(9.0).epsilon(0.5));
  CHECK(est.residuals.n == n);
  CHECK(est.residuals.T == T);
}

TEST_CASE("scale estimate ignores level shifts") {
  std::vector<double> x = iid_normal(300, 99);
  PanelData a(1, 300), b(1, 300);
  for (long t = 1; t <= 300; ++t) {
    a.at(1, t) = x[static_cast<size_t>(t - 1)];
    b.at(1, t) = x[static_cast<size_t>(t - 1)] + 250.0;
  }
  ScalingEstimate ea = estimate_scales(a, 2);
  ScalingEstimate eb = estimate_scales(b, 2);
  CHECK(eb.sigma2[0] == doctest::Approx(ea.sigma2[0]).epsilon(1e-8));
}

TEST_CASE("noiseless panel is degenerate for scale estimation") {
  PanelData p(2, 40);
  for (long j = 1; j <= 2; ++j)
    for (long t = 1; t <= 40; ++t) p.at(j, t) = (t > 20 ? 1.0 : 0.0) * static_cast<double>(j);
  try {
    estimate_scales(p, 1);
    FAIL("expected degenerate error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
    CHECK(std::string(e.what()).find("series") != std::string::npos);
  }
}

TEST_CASE("single-series panel reduces to the series estimator") {
  std::vector<double> x = iid_normal(128, 5);
  PanelData p(1, 128);
  for (long t = 1; t <= 128; ++t) p.at(1, t) = x[static_cast<size_t>(t - 1)];
  ScalingEstimate est = estimate_scales(p, 1);
  std::vector<double> resid = estimate_residuals(x, 1);
  LrvResult direct = long_run_variance(resid);
  CHECK(est.sigma2[0] == doctest::Approx(direct.sigma2).epsilon(1e-12));
  CHECK(est.tau[0] == direct.tau);
}
