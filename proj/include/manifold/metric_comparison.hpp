#pragma once

#include "manifold/neighbor_graph.hpp"
#include "manifold/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace manifold {

/// Distance ranks of every point as seen from every other point (1 = nearest),
/// ties broken by ascending index.
///
/// A dense table stores the full N x N ranks. A truncated table only knows
/// the first `max_rank()` ranks of each row and answers nullopt beyond them.
class RankTable {
 public:
  /// Dense ranks from a full distance matrix.
  static RankTable from_distances(const DistanceMatrix& distances, int workers = 0);
  /// Dense ranks of the euclidean distances between rows of `points`.
  static RankTable from_points(const PointMatrix& points, int workers = 0);
  /// Truncated ranks read off a neighbor graph.
  static RankTable from_graph(const NeighborGraph& graph);

  Index n_points() const noexcept { return n_; }
  bool dense() const noexcept { return dense_; }
  Index max_rank() const noexcept { return dense_ ? n_ - 1 : neighbors_.cols(); }

  /// The rank-1 neighbor of i.
  Index nearest(Index i) const { return neighbors_(i, 0); }
  std::optional<Index> rank(Index i, Index j) const;

 private:
  Index n_ = 0;
  bool dense_ = false;
  RowMatrix<std::int32_t> ranks_;  // dense only
  IndexMatrix neighbors_;          // rank-1 column when dense, graph prefix otherwise
};

/// Mean fraction of shared first-k neighbors.
double neighborhood_overlap(const NeighborGraph& a, const NeighborGraph& b, Index k);

struct ImbalanceResult {
  double delta_ab = 0.0;
  double delta_ba = 0.0;
  Index n = 0;
  /// Conditional ranks beyond a truncated table, counted as max_rank + 1.
  Index truncated_ab = 0;
  Index truncated_ba = 0;
};

/// Delta(a -> b) = 2 / N^2 * sum_i rank_b(i, nearest_a(i)), and the reverse.
ImbalanceResult information_imbalance(const RankTable& a, const RankTable& b);

/// Above this many points, imbalance from coordinates switches from dense
/// tables to maxk-truncated graphs.
inline constexpr Index kDenseRankLimit = 5000;

struct FeatureSelectionOptions {
  Index max_size = 1;
  /// Points in the evaluation subsample (all points when N is smaller).
  Index sample = 2000;
  Seed seed = 0;
  int workers = 0;
};

struct SelectionStep {
  Index size = 0;
  Index feature = 0;
  /// Imbalances of exactly the first `size` selected features.
  double d_fwd_prefix = 0.0;
  double d_bwd_prefix = 0.0;
  /// Best prefix of length <= size; what the curve reports.
  Index best_size = 0;
  double d_fwd = 0.0;
  double d_bwd = 0.0;
};

struct FeatureSelection {
  std::vector<Index> order;
  std::vector<SelectionStep> curve;
};

/// Forward greedy selection of columns minimising Delta(subset -> target),
/// ties by column index. Candidates whose columns are constant on the
/// sample are skipped. The reported curve keeps the best prefix seen so
/// far, so it never increases with size.
FeatureSelection greedy_feature_selection(const PointMatrix& points, std::span<const Index> target_columns,
                                          const FeatureSelectionOptions& options);

/// Same, with an arbitrary target given as ranks over the sampled rows
/// `sample_rows` of `points`.
FeatureSelection greedy_feature_selection(const PointMatrix& points, std::span<const Index> sample_rows,
                                          const RankTable& target, const FeatureSelectionOptions& options);

/// Seeded sample of min(n, size) row indices, sorted.
std::vector<Index> evaluation_sample(Index n, Index size, Seed seed);

}  // namespace manifold
