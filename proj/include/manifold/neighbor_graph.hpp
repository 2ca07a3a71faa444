#pragma once

#include "manifold/types.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>

namespace manifold {

/// Distance used to build a neighbor graph.
///
/// Distances are evaluated through a monotone "reduced" form (the sum of
/// |x_k - y_k|^p before the final root) so that search structures can prune
/// on partial sums; `distance()` applies the root.
class Metric {
 public:
  enum class Kind { euclidean, minkowski, precomputed };

  Metric() = default;
  static Metric euclidean() { return Metric(Kind::euclidean, 2.0); }
  static Metric minkowski(double p);
  static Metric precomputed() { return Metric(Kind::precomputed, 0.0); }

  /// Parses "euclidean", "minkowski:<p>" or "precomputed".
  static Metric parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  double p() const noexcept { return p_; }
  std::string name() const;

  /// Contribution of one coordinate difference to the reduced distance.
  double reduce_term(double diff) const noexcept {
    const double a = diff < 0 ? -diff : diff;
    if (kind_ == Kind::euclidean) return a * a;
    if (p_ == 1.0) return a;
    return std::pow(a, p_);
  }

  template <typename A, typename B>
  double reduced(const Eigen::DenseBase<A>& x, const Eigen::DenseBase<B>& y) const noexcept {
    double acc = 0.0;
    for (Index k = 0; k < x.size(); ++k) acc += reduce_term(x.derived().coeff(k) - y.derived().coeff(k));
    return acc;
  }

  double unreduce(double reduced) const noexcept {
    if (kind_ == Kind::euclidean) return std::sqrt(reduced);
    if (p_ == 1.0) return reduced;
    return std::pow(reduced, 1.0 / p_);
  }

  template <typename A, typename B>
  double distance(const Eigen::DenseBase<A>& x, const Eigen::DenseBase<B>& y) const noexcept {
    return unreduce(reduced(x, y));
  }

  friend bool operator==(const Metric&, const Metric&) = default;

 private:
  Metric(Kind kind, double p) : kind_(kind), p_(p) {}

  Kind kind_ = Kind::euclidean;
  double p_ = 2.0;
};

/// Sparse k-nearest-neighbor graph: row i holds the `maxk` nearest points
/// of i sorted by ascending distance, ties by ascending point index.
class NeighborGraph {
 public:
  enum class Source { computed, external };

  NeighborGraph() = default;

  /// Validates the row invariants and throws InputError when they fail.
  NeighborGraph(IndexMatrix indices, DistanceMatrix distances, Metric metric, Source source);

  Index n_points() const noexcept { return indices_.rows(); }
  Index maxk() const noexcept { return indices_.cols(); }
  const Metric& metric() const noexcept { return metric_; }
  Source source() const noexcept { return source_; }

  const IndexMatrix& indices() const noexcept { return indices_; }
  const DistanceMatrix& distances() const noexcept { return distances_; }

  /// Neighbor of rank r + 1 of point i (r is zero-based).
  Index neighbor(Index i, Index r) const { return indices_(i, r); }
  double distance(Index i, Index r) const { return distances_(i, r); }

  /// Column prefix keeping the first `maxk` neighbors.
  NeighborGraph truncated(Index maxk) const;

  friend bool operator==(const NeighborGraph& a, const NeighborGraph& b) {
    return a.metric_ == b.metric_ && a.indices_ == b.indices_ && a.distances_ == b.distances_;
  }

 private:
  IndexMatrix indices_;
  DistanceMatrix distances_;
  Metric metric_;
  Source source_ = Source::computed;
};

/// Writes the `NNGRAPH v1` text format with 17 significant digits.
void save_neighbor_graph(const NeighborGraph& graph, const std::filesystem::path& path);

/// Reads the `NNGRAPH v1` text format. Rows are re-sorted by distance if
/// they arrive out of order; the result is marked as externally supplied.
NeighborGraph load_neighbor_graph(const std::filesystem::path& path);

/// True when the file starts with the graph header.
bool is_neighbor_graph_file(const std::filesystem::path& path);

}  // namespace manifold
