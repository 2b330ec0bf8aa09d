#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "panelseg/errors.hpp"
#include "panelseg/panel.hpp"

using namespace panelseg;

namespace {

std::string write_temp(const std::string& content) {
  static int counter = 0;
  std::string path = "panel_test_" + std::to_string(counter++) + ".csv";
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("csv readback: 2x4 panel") {
  const std::string path = write_temp("1,1,0,0\n0,0,0,0\n");
  PanelData p = load_csv(path, false);
  CHECK(p.n == 2);
  CHECK(p.T == 4);
  CHECK(p.at(1, 1) == 1.0);
  CHECK(p.at(1, 2) == 1.0);
  CHECK(p.at(1, 3) == 0.0);
  CHECK(p.at(2, 4) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("csv header row is skipped when requested") {
  const std::string path = write_temp("t1,t2,t3\n1,2,3\n4,5,6\n");
  PanelData p = load_csv(path, true);
  CHECK(p.n == 2);
  CHECK(p.T == 3);
  CHECK(p.at(2, 2) == 5.0);
  std::remove(path.c_str());
}

TEST_CASE("empty file rejected") {
  const std::string path = write_temp("");
  CHECK_THROWS_AS(load_csv(path, false), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("non-numeric cell names its position") {
  const std::string path = write_temp("1,2,a,4\n5,6,7,8\n");
  try {
    load_csv(path, false);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find('1') != std::string::npos);
    CHECK(msg.find('3') != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("ragged rows rejected with row index") {
  const std::string path = write_temp("1,2,3\n4,5\n");
  try {
    load_csv(path, false);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("single-column input rejected") {
  const std::string path = write_temp("1\n2\n");
  CHECK_THROWS_AS(load_csv(path, false), DimensionError);
  std::remove(path.c_str());
}

TEST_CASE("standardize divides by per-series scale") {
  PanelData p(2, 3);
  for (long t = 1; t <= 3; ++t) p.at(1, t) = 2.0;
  p.at(2, 1) = 1.0;
  p.at(2, 2) = -1.0;
  p.at(2, 3) = 3.0;
  ScaledPanel s = standardize(p, {2.0, 0.5});
  for (long t = 1; t <= 3; ++t) CHECK(s.at(1, t) == 1.0);
  CHECK(s.at(2, 1) == 2.0);
  CHECK(s.at(2, 2) == -2.0);
  CHECK(s.at(2, 3) == 6.0);
}

TEST_CASE("zero or negative scales rejected") {
  PanelData p(2, 3);
  CHECK_THROWS_AS(standardize(p, {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(standardize(p, {-1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(standardize(p, {1.0}), DimensionError);
}

TEST_CASE("standardize by unit scales is the identity") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  PanelData p(3, 7);
  for (double& v : p.values) v = nd(rng);
  ScaledPanel once = standardize(p, {2.0, 3.0, 0.25});
  PanelData mid(3, 7);
  mid.values = once.values;
  ScaledPanel twice = standardize(mid, {1.0, 1.0, 1.0});
  for (size_t k = 0; k < once.values.size(); ++k) CHECK(twice.values[k] == once.values[k]);
}

TEST_CASE("write then load round-trips bit-exactly") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  PanelData p(4, 9);
  for (double& v : p.values) v = nd(rng) * 1e3;
  p.at(1, 1) = 1.0 / 3.0;
  p.at(2, 2) = -0.1;
  const std::string path = write_temp("");
  write_csv(p, path);
  PanelData q = load_csv(path, false);
  REQUIRE(q.n == p.n);
  REQUIRE(q.T == p.T);
  for (size_t k = 0; k < p.values.size(); ++k) CHECK(q.values[k] == p.values[k]);
  std::remove(path.c_str());
}

TEST_CASE("parse_csv matches load_csv") {
  const std::string text = "1.5,2.5\n-3,4e2\n";
  PanelData a = parse_csv(text, false);
  const std::string path = write_temp(text);
  PanelData b = load_csv(path, false);
  CHECK(a.values == b.values);
  std::remove(path.c_str());
}
