#pragma once

#include "manifold/dataset.hpp"
#include "manifold/neighbor_graph.hpp"
#include "manifold/types.hpp"

namespace manifold {

struct NeighborOptions {
  Metric metric = Metric::euclidean();
  /// Above this many features the kd-tree is skipped in favour of a blocked scan.
  Index brute_force_above_dim = 30;
  int workers = 0;
};

/// min(100, N - 1).
Index default_maxk(Index n_points);

/// Exact k-nearest neighbors of every point, ties broken by point index.
/// Throws PreconditionError for N < 2, maxk outside [1, N-1], or when two
/// points coincide (run `clean` first).
NeighborGraph compute_neighbors(const PointMatrix& points, Index maxk, const NeighborOptions& options = {});

NeighborGraph compute_neighbors(const Dataset& ds, Index maxk, const NeighborOptions& options = {});

/// Graph from a full symmetric distance matrix (diagonal ignored).
NeighborGraph neighbors_from_distance_matrix(const DistanceMatrix& distances, Index maxk, int workers = 0);

}  // namespace manifold
