#include "manifold/dataset.hpp"
#include "manifold/error.hpp"
#include "manifold/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <limits>

using namespace manifold;
namespace fs = std::filesystem;

namespace {

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name, std::ios::binary) << text;
  return dir / name;
}

PointMatrix rows(std::initializer_list<std::initializer_list<double>> values) {
  PointMatrix m(static_cast<Index>(values.size()), static_cast<Index>(values.begin()->size()));
  Index i = 0;
  for (const auto& r : values) {
    Index k = 0;
    for (double v : r) m(i, k++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("load plain and headed files") {
  const auto dir = oracle::scratch_dir("dataset-load");
  const Dataset plain = load_points(write(dir, "a.csv", "0,0\n1,0\n0,1"));
  CHECK(plain.n_points() == 3);
  CHECK(plain.n_features() == 2);
  CHECK(plain.point_ids() == std::vector<Index>{0, 1, 2});
  CHECK(plain.points()(2, 1) == 1.0);

  const Dataset headed = load_points(write(dir, "b.csv", "x,y\n0,0\n1,0\n0,1\n"), ',', true);
  CHECK(headed == plain);

  const Dataset tabbed = load_points(write(dir, "c.tsv", "0\t0\n1\t0\n0\t1\n"), '\t');
  CHECK(tabbed == plain);
}

TEST_CASE("non-numeric cell names row and column") {
  const auto dir = oracle::scratch_dir("dataset-bad");
  try {
    load_points(write(dir, "bad.csv", "0,0\n1,abc\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
    CHECK(e.column() == 1);
  }
  try {
    load_points(write(dir, "ragged.csv", "0,0\n1,2,3\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
  }
  CHECK_THROWS_AS(load_points(dir / "missing.csv"), InputError);
  CHECK_THROWS_AS(load_points(write(dir, "empty.csv", "")), InputError);
}

TEST_CASE("clean drops exact duplicates keeping the first") {
  const Dataset ds = Dataset::from_points(rows({{0, 0}, {0, 0}, {1, 1}}));
  const auto [out, report] = clean(ds, true);
  CHECK(out.n_points() == 2);
  CHECK(out.point_ids() == std::vector<Index>{0, 2});
  CHECK(report.duplicates == 1);
  CHECK(report.nonfinite == 0);
  CHECK(report.n_before == 3);
  CHECK(report.n_after == 2);

  const auto [kept, kept_report] = clean(ds, false);
  CHECK(kept.n_points() == 3);
  CHECK(kept_report.empty());
}

TEST_CASE("clean drops non-finite rows") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto [out, report] = clean(Dataset::from_points(rows({{0, 0}, {1, nan}})), true);
  CHECK(out.n_points() == 1);
  CHECK(report.nonfinite == 1);
  CHECK(out.point_ids() == std::vector<Index>{0});

  CHECK_THROWS_AS(clean(Dataset::from_points(rows({{nan, 0}}))), InputError);
}

TEST_CASE("clean leaves defect-free data unchanged") {
  const Dataset ds = Dataset::from_points(rows({{0, 0}, {1, 0}, {0, 1}}));
  const auto [out, report] = clean(ds);
  CHECK(out == ds);
  CHECK(report.empty());
}

TEST_CASE("clean is idempotent and point ids stay an increasing subsequence") {
  const double inf = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> cell(0, 3);
  PointMatrix m(400, 3);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index k = 0; k < 3; ++k) m(i, k) = cell(rng);
  m(7, 1) = inf;
  m(100, 0) = -inf;
  const auto [once, r1] = clean(Dataset::from_points(m));
  const auto [twice, r2] = clean(once);
  CHECK(once == twice);
  CHECK(r2.empty());
  CHECK(r1.nonfinite == 2);
  CHECK(once.n_points() <= 64);
  const auto& ids = once.point_ids();
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
  for (Index i = 0; i < once.n_points(); ++i)
    for (Index j = i + 1; j < once.n_points(); ++j) CHECK(oracle::euclid(once.points(), i, j) > 0.0);
}

TEST_CASE("save then load round-trips bit-exactly") {
  const auto dir = oracle::scratch_dir("dataset-roundtrip");
  PointMatrix m = synthetic::uniform_hypercube(200, 4, 11);
  m(0, 0) = 1e-300;
  m(1, 1) = -123456789.123456789;
  m(2, 2) = 0.1;
  const Dataset ds = Dataset::from_points(m);
  save_points(ds, dir / "p.csv");
  CHECK(load_points(dir / "p.csv") == ds);
}

TEST_SUITE_END();
