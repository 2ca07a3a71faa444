#pragma once

#include "manifold/density.hpp"
#include "manifold/neighbor_graph.hpp"
#include "manifold/types.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace manifold {

/// Distance of every point to its nearest denser point.
///
/// "Denser" is a strict total order: higher log-density, and on exact ties
/// the lower point index.
struct DecisionGraph {
  std::vector<double> delta;
  std::vector<double> log_rho;
  std::vector<double> log_rho_err;
  /// Empty only for the global density maximum.
  std::vector<std::optional<Index>> nearest_higher;

  Index size() const noexcept { return static_cast<Index>(delta.size()); }
};

/// True when point a precedes point b in the density order.
inline bool denser(std::span<const double> log_rho, Index a, Index b) {
  const double ra = log_rho[static_cast<std::size_t>(a)];
  const double rb = log_rho[static_cast<std::size_t>(b)];
  return ra > rb || (ra == rb && a < b);
}

/// Nearest denser point searched in each graph row. Points without a denser
/// neighbor in their row fall back to a search over the whole dataset:
/// exact over `points` when given, otherwise shortest paths along the
/// (symmetrised) graph. The global maximum gets its largest row distance.
DecisionGraph decision_graph(const DensityField& density, const NeighborGraph& graph,
                             const PointMatrix* points = nullptr);

struct ClusterResult {
  std::vector<Index> labels;
  /// Density peak of each cluster.
  std::vector<Index> centers;
  std::vector<double> peak_log_rho;
  std::vector<double> peak_err;
  /// Symmetric; -inf where two clusters share no border.
  Eigen::MatrixXd saddle_log_rho;
  Eigen::MatrixXd saddle_err;
  std::optional<double> z_used;
  std::vector<std::string> warnings;

  Index n_clusters() const noexcept { return static_cast<Index>(centers.size()); }
  std::vector<Index> populations() const;
};

/// Density-peak assignment from user-chosen centers: cluster c is seeded by
/// centers[c] and every other point, in decreasing density, takes the label
/// of its nearest denser point. Saddles are left empty (see attach_saddles).
ClusterResult dp_cluster(const DecisionGraph& dg, std::span<const Index> centers);

/// Fills the saddle matrices of `result` from the border rule used by ADP.
void attach_saddles(ClusterResult& result, const DensityField& density, const NeighborGraph& graph);

/// Automatic density peaks.
///
/// Every point denser than all of its first k_used neighbors is a putative
/// peak. Two points i, j in different clusters form a border pair when each
/// is among the first max(1, k_used / 2) neighbors of the other; the saddle
/// of two clusters is their densest border point. A pair is merged when
/// either of its peaks c fails ln rho_c - ln rho_s > z (sigma_c + sigma_s);
/// merges go least significant first, the denser peak survives, and
/// saddles are updated until every remaining pair passes. Final clusters
/// are numbered by decreasing peak density.
ClusterResult adp_cluster(const DensityField& density, const NeighborGraph& graph, double z);

struct DendrogramLink {
  Index a;
  Index b;
  double height;
};

/// Layout on [0, 1]: cluster c occupies an interval of length
/// population / N centred at x[c]. Clusters are ordered by joining them
/// along saddles from the highest down, the group with the higher peak
/// placed first; unconnected groups follow in cluster order.
struct Dendrogram {
  std::vector<Index> order;
  std::vector<double> x;
  std::vector<double> width;
  std::vector<double> peak_height;
  std::vector<DendrogramLink> links;
};

Dendrogram dendrogram(const ClusterResult& result);

}  // namespace manifold
