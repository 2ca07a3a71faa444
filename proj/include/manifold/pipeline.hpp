#pragma once

#include "manifold/density.hpp"
#include "manifold/id_estimation.hpp"
#include "manifold/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace manifold {

inline constexpr const char* kToolVersion = "0.1.0";

/// Default ADP threshold used by the pipeline and the cluster subcommand.
inline constexpr double kDefaultZ = 1.5;

enum class ClusterMethod { dp, adp };

struct PipelineOptions {
  /// Points file; ignored when `demo` is set.
  std::filesystem::path input;
  char delimiter = ',';
  bool has_header = false;
  std::optional<std::string> demo;
  Index demo_points = 10000;

  /// Defaults to min(100, N - 1).
  std::optional<Index> maxk;
  std::string metric = "euclidean";
  IdMethod id_method = IdMethod::twonn_mle;
  std::vector<double> fractions = {1.0, 0.5, 0.25, 0.125};
  std::vector<Index> n1_values = {1, 2, 4, 8, 16};
  double discard = 0.1;
  Index repeats = 10;
  DensityMethod density_method = DensityMethod::pak;
  Index knn_k = 30;
  double d_threshold = 23.928;
  ClusterMethod cluster_method = ClusterMethod::adp;
  double z = kDefaultZ;
  std::vector<Index> centers;
  Seed seed = 0;
  int workers = 0;
};

struct PipelineReport {
  Index n_points = 0;
  double id = 0.0;
  Index n_clusters = 0;
  std::map<std::string, double> seconds;
  std::vector<std::string> warnings;
};

/// Runs neighbors, id, density and clustering and writes graph.nn, id.json,
/// density.csv, clusters.json, dendrogram.json and manifest.json into
/// `out_dir`. Output is staged in a sibling directory and moved into place
/// only when every stage succeeded.
PipelineReport run_pipeline(const PipelineOptions& options, const std::filesystem::path& out_dir);

struct BenchRow {
  std::string stage;
  Index n = 0;
  double seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  /// Least-squares slope of ln(seconds) against ln(n), per stage.
  std::map<std::string, double> slopes;
};

struct BenchOptions {
  std::vector<Index> n_values = {1000, 10000};
  Index maxk = 100;
  Seed seed = 0;
  int workers = 0;
  /// Each timing is the minimum over at least this many runs; stages
  /// faster than 0.25 s are rerun until that much time has been spent.
  int repeats = 1;
  bool include_adp = true;
};

/// Per-stage wall times on uniform points in the unit square.
BenchReport bench(const BenchOptions& options);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace manifold
