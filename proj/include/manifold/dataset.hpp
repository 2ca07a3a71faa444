#pragma once

#include "manifold/neighbor_graph.hpp"
#include "manifold/types.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace manifold {

/// Rows dropped by `clean`, by reason.
struct CleaningReport {
  Index nonfinite = 0;
  Index duplicates = 0;
  Index n_before = 0;
  Index n_after = 0;

  bool empty() const noexcept { return nonfinite == 0 && duplicates == 0; }
  friend bool operator==(const CleaningReport&, const CleaningReport&) = default;
};

/// Immutable point cloud or externally supplied neighbor distances.
///
/// Exactly one of the two sources is present. `point_ids()` maps each row
/// back to its row in the original input and survives cleaning.
class Dataset {
 public:
  static Dataset from_points(PointMatrix points);
  static Dataset from_points(PointMatrix points, std::vector<Index> point_ids);
  static Dataset from_distances(NeighborGraph graph);

  bool has_points() const noexcept { return points_.has_value(); }
  /// Throws PreconditionError when the dataset was built from distances.
  const PointMatrix& points() const;
  /// Throws PreconditionError when the dataset was built from points.
  const NeighborGraph& external_distances() const;

  Index n_points() const noexcept { return static_cast<Index>(point_ids_.size()); }
  Index n_features() const noexcept { return points_ ? points_->cols() : 0; }
  const std::vector<Index>& point_ids() const noexcept { return point_ids_; }

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::optional<PointMatrix> points_;
  std::shared_ptr<const NeighborGraph> graph_;
  std::vector<Index> point_ids_;
};

/// Parses a delimited text file of real numbers, one point per row.
/// Blank lines are skipped; row numbers in errors count data rows from 0.
Dataset load_points(const std::filesystem::path& path, char delimiter = ',', bool has_header = false);

/// Writes points with 17 significant digits so that reloading is bit-exact.
void save_points(const Dataset& ds, const std::filesystem::path& path, char delimiter = ',');

/// Drops rows with non-finite values and, optionally, exact duplicate rows
/// (first occurrence kept). Throws InputError if nothing survives.
std::pair<Dataset, CleaningReport> clean(const Dataset& ds, bool drop_duplicates = true);

}  // namespace manifold
