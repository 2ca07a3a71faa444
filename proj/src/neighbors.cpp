#include "manifold/neighbors.hpp"

#include "kdtree.hpp"
#include "manifold/error.hpp"
#include "manifold/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <vector>

namespace manifold {

Index default_maxk(Index n_points) { return std::min<Index>(100, n_points - 1); }

namespace {

void check_sizes(Index n, Index maxk) {
  if (n < 2) throw PreconditionError(fmt::format("need at least 2 points, got {}", n));
  if (maxk < 1 || maxk > n - 1) throw PreconditionError(fmt::format("maxk={} outside [1, N-1] for N={}", maxk, n));
}

// Writes sorted candidates into row i. With a metric, candidates hold reduced
// distances: the root is applied and the row re-sorted so that the index
// tie-break also holds on the final values.
void emit_row(Index i, std::vector<detail::Candidate>& row, const Metric* metric, IndexMatrix& idx,
              DistanceMatrix& dist) {
  if (metric) {
    for (auto& c : row) c.first = metric->unreduce(c.first);
    std::sort(row.begin(), row.end());
  }
  if (row.front().first == 0.0)
    throw PreconditionError(
        fmt::format("points {} and {} coincide; remove duplicates before building neighbors", i, row.front().second));
  for (std::size_t r = 0; r < row.size(); ++r) {
    idx(i, static_cast<Index>(r)) = row[r].second;
    dist(i, static_cast<Index>(r)) = row[r].first;
  }
}

}  // namespace

NeighborGraph compute_neighbors(const PointMatrix& points, Index maxk, const NeighborOptions& options) {
  const Index n = points.rows();
  check_sizes(n, maxk);
  const Metric& metric = options.metric;
  if (metric.kind() == Metric::Kind::precomputed)
    throw PreconditionError("coordinates cannot be searched with the precomputed metric");

  IndexMatrix idx(n, maxk);
  DistanceMatrix dist(n, maxk);
  const Index dims = points.cols();

  if (dims <= options.brute_force_above_dim) {
    const detail::KdTree tree(points, metric);
    parallel_for(n, options.workers, [&](Index i) {
      detail::KnnHeap heap(maxk);
      tree.query(points.data() + i * dims, i, heap);
      emit_row(i, heap.sorted(), &metric, idx, dist);
    });
  } else {
    parallel_for(n, options.workers, [&](Index i) {
      std::vector<detail::Candidate> all;
      all.reserve(static_cast<std::size_t>(n - 1));
      const double* q = points.data() + i * dims;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* p = points.data() + j * dims;
        double acc = 0.0;
        for (Index k = 0; k < dims; ++k) acc += metric.reduce_term(q[k] - p[k]);
        all.emplace_back(acc, j);
      }
      std::nth_element(all.begin(), all.begin() + (maxk - 1), all.end());
      all.resize(static_cast<std::size_t>(maxk));
      std::sort(all.begin(), all.end());
      emit_row(i, all, &metric, idx, dist);
    });
  }
  return NeighborGraph(std::move(idx), std::move(dist), metric, NeighborGraph::Source::computed);
}

NeighborGraph compute_neighbors(const Dataset& ds, Index maxk, const NeighborOptions& options) {
  if (!ds.has_points()) {
    const auto& g = ds.external_distances();
    if (maxk > g.maxk())
      throw PreconditionError(fmt::format("external distances hold {} neighbors, {} requested", g.maxk(), maxk));
    return g.truncated(maxk);
  }
  return compute_neighbors(ds.points(), maxk, options);
}

NeighborGraph neighbors_from_distance_matrix(const DistanceMatrix& distances, Index maxk, int workers) {
  const Index n = distances.rows();
  if (distances.cols() != n) throw PreconditionError("distance matrix must be square");
  check_sizes(n, maxk);
  IndexMatrix idx(n, maxk);
  DistanceMatrix dist(n, maxk);
  parallel_for(n, workers, [&](Index i) {
    std::vector<detail::Candidate> all;
    all.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = distances(i, j);
      if (!std::isfinite(d) || d < 0.0)
        throw InputError(fmt::format("distance ({}, {}) is negative or non-finite", i, j));
      all.emplace_back(d, j);
    }
    std::nth_element(all.begin(), all.begin() + (maxk - 1), all.end());
    all.resize(static_cast<std::size_t>(maxk));
    std::sort(all.begin(), all.end());
    emit_row(i, all, nullptr, idx, dist);
  });
  return NeighborGraph(std::move(idx), std::move(dist), Metric::precomputed(), NeighborGraph::Source::external);
}

}  // namespace manifold
