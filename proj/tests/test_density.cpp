#include "manifold/density.hpp"
#include "manifold/error.hpp"
#include "manifold/neighbors.hpp"
#include "manifold/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <map>
#include <numbers>

using namespace manifold;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

template <typename T>
double median(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  return static_cast<double>(v[v.size() / 2]);
}

/// Points of the unit square whose k-ball lies inside it.
std::vector<Index> interior(const PointMatrix& x, const NeighborGraph& g, Index k) {
  std::vector<Index> out;
  for (Index i = 0; i < x.rows(); ++i) {
    const double edge = std::min({x(i, 0), 1.0 - x(i, 0), x(i, 1), 1.0 - x(i, 1)});
    if (g.distance(i, k - 1) < edge) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("density_estimation");

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1.0) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2.0) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3.0) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  CHECK(unit_ball_volume(7.0) == doctest::Approx(16.0 * std::pow(std::numbers::pi, 3) / 105.0).epsilon(1e-12));
  CHECK(unit_ball_volume(7.0) == doctest::Approx(4.72477).epsilon(1e-5));
  CHECK(log_unit_ball_volume(2.5) == doctest::Approx(std::log(unit_ball_volume(2.5))));
  CHECK_THROWS_AS(unit_ball_volume(0.0), PreconditionError);
  CHECK_THROWS_AS(unit_ball_volume(-1.0), PreconditionError);
}

TEST_CASE("kNN formula on hand-built graphs") {
  PointMatrix x(3, 1);
  x << 0, 1, 3;
  const DensityField f = knn_density(compute_neighbors(x, 2), 1, 1.0);
  CHECK(f.log_rho[0] == doctest::Approx(std::log(1.0 / 6.0)));
  CHECK(f.log_rho_err[0] == 1.0);
  CHECK(f.k_used[0] == 1);
  CHECK(f.method == DensityMethod::knn);

  IndexMatrix idx(10, 4);
  DistanceMatrix dist(10, 4);
  for (Index i = 0; i < 10; ++i)
    for (Index r = 0; r < 4; ++r) {
      idx(i, r) = (i + r + 1) % 10;
      dist(i, r) = 0.25 * static_cast<double>(r + 1);
    }
  const NeighborGraph g(idx, dist, Metric::precomputed(), NeighborGraph::Source::external);
  const DensityField h = knn_density(g, 4, 2.0);
  for (Index i = 0; i < 10; ++i) {
    CHECK(std::exp(h.log_rho[static_cast<std::size_t>(i)]) == doctest::Approx(4.0 / (10.0 * std::numbers::pi)));
    CHECK(h.log_rho_err[static_cast<std::size_t>(i)] == 0.5);
  }
  CHECK_THROWS_AS(knn_density(g, 5, 2.0), PreconditionError);
  CHECK_THROWS_AS(knn_density(g, 0, 2.0), PreconditionError);
  CHECK_THROWS_AS(knn_density(g, 2, 0.0), PreconditionError);
}

TEST_CASE("kNN density integrates to one on the unit square") {
  const PointMatrix x = synthetic::uniform_hypercube(10000, 2, 21);
  const NeighborGraph g = compute_neighbors(x, 30);
  const DensityField f = knn_density(g, 30, 2.0);
  double acc = 0.0;
  const auto inner = interior(x, g, 30);
  for (Index i : inner) acc += std::exp(f.log_rho[static_cast<std::size_t>(i)]);
  const double m = acc / static_cast<double>(inner.size());
  CHECK(m >= 0.95);
  CHECK(m <= 1.05);
}

TEST_CASE("kNN density needs the intrinsic dimension") {
  // a plane embedded in five dimensions
  auto embedded = [](Index n, std::uint64_t seed) {
    const PointMatrix p = synthetic::uniform_hypercube(n, 2, seed);
    PointMatrix x = PointMatrix::Zero(n, 5);
    x.col(0) = p.col(0);
    x.col(3) = p.col(1);
    return x;
  };
  auto drift = [&](double id) {
    const double small = mean(knn_density(compute_neighbors(embedded(1000, 22), 10), 10, id).log_rho);
    const double large = mean(knn_density(compute_neighbors(embedded(10000, 23), 10), 10, id).log_rho);
    return std::abs(large - small);
  };
  CHECK(drift(2.0) < 0.1);
  CHECK(drift(5.0) > 1.0);
}

TEST_CASE("scaling coordinates shifts every log-density by -id ln c") {
  const PointMatrix x = synthetic::uniform_hypercube(2000, 2, 24);
  const NeighborGraph g = compute_neighbors(x, 50);
  const NeighborGraph g3 = compute_neighbors(PointMatrix(3.0 * x), 50);
  const DensityField a = knn_density(g, 20, 2.0), b = knn_density(g3, 20, 2.0);
  const DensityField pa = pak_density(g, 2.0), pb = pak_density(g3, 2.0);
  for (std::size_t i = 0; i < 2000; ++i) {
    REQUIRE(b.log_rho[i] == doctest::Approx(a.log_rho[i] - 2.0 * std::log(3.0)).epsilon(1e-10));
    // the slope fit stops at a finite tolerance
    REQUIRE(pb.log_rho[i] == doctest::Approx(pa.log_rho[i] - 2.0 * std::log(3.0)).epsilon(1e-6));
    REQUIRE(pb.k_used[i] == pa.k_used[i]);
  }
}

TEST_CASE("PAk on a flat torus keeps large neighborhoods") {
  const Index maxk = 100;
  const NeighborGraph g = compute_neighbors(synthetic::flat_torus(10000, 25), maxk);
  const DensityField pak = pak_density(g, 2.0);
  CHECK(median(pak.k_used) >= 0.8 * maxk);
  // compare with kNN at the same k, grouped by k to avoid recomputation
  int agree = 0;
  std::map<Index, std::vector<Index>> by_k;
  for (Index i = 0; i < g.n_points(); ++i) by_k[pak.k_used[static_cast<std::size_t>(i)]].push_back(i);
  for (const auto& [k, points] : by_k) {
    const DensityField knn = knn_density(g, k, 2.0);
    for (Index i : points) {
      const auto s = static_cast<std::size_t>(i);
      agree += std::abs(pak.log_rho[s] - knn.log_rho[s]) <= 2.0 * pak.log_rho_err[s];
    }
  }
  CHECK(agree >= 0.95 * static_cast<double>(g.n_points()));
  for (std::size_t s = 0; s < pak.k_used.size(); ++s) {
    REQUIRE(pak.k_used[s] >= 4);
    REQUIRE(pak.k_used[s] <= maxk);
    REQUIRE(std::isfinite(pak.log_rho[s]));
  }
}

TEST_CASE("PAk error bar has nominal one-sigma coverage on uniform data") {
  // true log-density of the unit-area torus is 0
  const NeighborGraph g = compute_neighbors(synthetic::flat_torus(10000, 26), 100);
  const DensityField pak = pak_density(g, 2.0);
  int covered = 0, covered_poisson = 0;
  for (std::size_t s = 0; s < pak.log_rho.size(); ++s) {
    covered += std::abs(pak.log_rho[s]) <= pak.log_rho_err[s];
    covered_poisson += std::abs(pak.log_rho[s]) <= 1.0 / std::sqrt(static_cast<double>(pak.k_used[s]));
  }
  const double rate = covered / 10000.0;
  CHECK(rate > 0.6);
  CHECK(rate < 0.8);
  // 1/sqrt(k) ignores the fitted slope and undercovers
  CHECK(covered_poisson / 10000.0 < 0.5);
}

TEST_CASE("PAk shrinks neighborhoods at a density step") {
  // density 1000 on [0,1]^2 touching density 10000 on [1,2]x[0,1]
  const PointMatrix sparse = synthetic::uniform_hypercube(1000, 2, 27);
  PointMatrix dense = synthetic::uniform_hypercube(10000, 2, 28);
  dense.col(0).array() += 1.0;
  PointMatrix x(11000, 2);
  x << sparse, dense;
  const DensityField pak = pak_density(compute_neighbors(x, 100), 2.0);
  std::vector<Index> step, inner;
  for (Index i = 0; i < 1000; ++i) {
    const Index k = pak.k_used[static_cast<std::size_t>(i)];
    const double to_step = 1.0 - x(i, 0);
    const double to_edge = std::min({x(i, 0), x(i, 1), 1.0 - x(i, 1)});
    if (to_step < 0.1 && to_edge > 0.2) step.push_back(k);
    if (to_step > 0.4 && to_edge > 0.3) inner.push_back(k);
  }
  REQUIRE(step.size() > 20);
  REQUIRE(inner.size() > 20);
  CHECK(median(step) < median(inner));
}

TEST_CASE("PAk beats fixed-k kNN on a Gaussian") {
  // neighborhoods up to 200 leave room for the adaptive fit
  const auto data = synthetic::two_gaussians_1d(10000, 29);
  PointMatrix x = data.points;
  std::vector<double> truth(10000);
  for (Index i = 0; i < 10000; ++i) truth[static_cast<std::size_t>(i)] = oracle::log_density_1d_mixture(x(i, 0));
  const NeighborGraph g = compute_neighbors(x, 200);
  CHECK(oracle::rmse(pak_density(g, 1.0).log_rho, truth) < oracle::rmse(knn_density(g, 30, 1.0).log_rho, truth));

  // a single standard Gaussian
  std::mt19937_64 rng(30);
  std::normal_distribution<double> z(0.0, 1.0);
  PointMatrix single(10000, 1);
  for (Index i = 0; i < 10000; ++i) {
    single(i, 0) = z(rng);
    truth[static_cast<std::size_t>(i)] = std::log(oracle::normal_pdf(single(i, 0), 0.0, 1.0));
  }
  const NeighborGraph gs = compute_neighbors(single, 200);
  CHECK(oracle::rmse(pak_density(gs, 1.0).log_rho, truth) < oracle::rmse(knn_density(gs, 30, 1.0).log_rho, truth));
}

TEST_CASE("PAk preconditions and worker independence") {
  const NeighborGraph small = compute_neighbors(synthetic::uniform_hypercube(50, 2, 31), 3);
  CHECK_THROWS_AS(pak_density(small, 2.0), PreconditionError);
  CHECK_THROWS_AS(pak_density(compute_neighbors(synthetic::uniform_hypercube(50, 2, 31), 10), 0.0), PreconditionError);
  CHECK_THROWS_AS(pak_density(small, 2.0, {23.928, 2}), PreconditionError);

  const NeighborGraph g = compute_neighbors(synthetic::uniform_hypercube(3000, 2, 32), 60);
  const DensityField one = pak_density(g, 2.0, {23.928, 4, 1});
  const DensityField many = pak_density(g, 2.0, {23.928, 4, 7});
  CHECK(one.log_rho == many.log_rho);
  CHECK(one.k_used == many.k_used);
}

TEST_CASE("method names") {
  CHECK(parse_density_method("pak") == DensityMethod::pak);
  CHECK(to_string(DensityMethod::knn) == "knn");
  CHECK_THROWS_AS(parse_density_method("kde"), InputError);
}

TEST_SUITE_END();
