#pragma once

#include "manifold/clustering.hpp"
#include "manifold/dataset.hpp"
#include "manifold/density.hpp"
#include "manifold/id_estimation.hpp"
#include "manifold/metric_comparison.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace manifold {

// JSON for structured results, CSV for per-point vectors. Reals are written
// so that reading them back gives the same double.

void write_id_json(const IdScan& scan, IdMethod method, const std::filesystem::path& path);

void write_density_csv(const DensityField& density, std::span<const Index> point_ids,
                       const std::filesystem::path& path);

/// Reads a density CSV; rows must be in point order. `id_used` is left at 0.
struct DensityTable {
  std::vector<Index> point_ids;
  DensityField density;
};
DensityTable read_density_csv(const std::filesystem::path& path);

void write_clusters_json(const ClusterResult& result, const Dendrogram& tree, const std::filesystem::path& path);
void write_dendrogram_json(const Dendrogram& tree, const std::filesystem::path& path);
void write_decision_graph_csv(const DecisionGraph& dg, std::span<const Index> point_ids,
                              const std::filesystem::path& path);

void write_cleaning_report_json(const CleaningReport& report, const std::filesystem::path& path);
void write_selection_json(const FeatureSelection& selection, const std::filesystem::path& path);
void write_overlap_json(double overlap, Index k, Index n, const std::filesystem::path& path);
void write_imbalance_json(const ImbalanceResult& result, const std::filesystem::path& path);

/// Writes text to `path`, or to stdout when path is "-".
void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace manifold
