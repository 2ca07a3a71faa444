#pragma once

#include "manifold/neighbor_graph.hpp"
#include "manifold/types.hpp"

#include <string_view>
#include <vector>

namespace manifold {

enum class DensityMethod { knn, pak };

std::string_view to_string(DensityMethod method);
DensityMethod parse_density_method(std::string_view name);

/// Per-point natural-log density on the intrinsic manifold.
struct DensityField {
  std::vector<double> log_rho;
  std::vector<double> log_rho_err;
  std::vector<Index> k_used;
  double id_used = 0.0;
  DensityMethod method = DensityMethod::knn;

  Index size() const noexcept { return static_cast<Index>(log_rho.size()); }
};

/// Volume of the unit ball in `id` dimensions, pi^(id/2) / Gamma(id/2 + 1).
double unit_ball_volume(double id);
double log_unit_ball_volume(double id);

/// Fixed-k estimator: rho_i = k / (N * omega_id * d_{i,k}^id), error 1/sqrt(k).
DensityField knn_density(const NeighborGraph& graph, Index k, double id, int workers = 0);

/// How PAk decides that the density is no longer constant.
enum class PakTest {
  /// Likelihood ratio between equal and separate densities at point i and
  /// at its k-th neighbor j, from their k-neighbor volumes V_i and V_j:
  /// D_k = -2k (ln V_i + ln V_j - 2 ln(V_i + V_j) + ln 4).
  neighbor_density,
  /// Likelihood ratio between a constant log-density and one linear in the
  /// shell index, both fitted to the first k shells of point i.
  shell_slope,
};

struct PakOptions {
  /// Likelihood-ratio threshold; 23.928 is the chi-square(1) quantile at p = 1e-6.
  double d_threshold = 23.928;
  Index k_min = 4;
  int workers = 0;
  PakTest test = PakTest::neighbor_density;
};

/// Point-adaptive kNN.
///
/// For each point the neighborhood grows from `k_min` while the selected
/// test stays below `d_threshold`; k_used is the last k accepted. On those
/// k shells the log-density is modelled as F + a * l, where shell l
/// (1-based) has volume omega_id * (d_l^id - d_{l-1}^id) and an exponential
/// waiting volume. The reported log-density is the fitted intercept F at
/// the point itself; its error is the asymptotic standard deviation of that
/// intercept, sqrt((4k + 2) / (k (k - 1))).
DensityField pak_density(const NeighborGraph& graph, double id, const PakOptions& options = {});

}  // namespace manifold
