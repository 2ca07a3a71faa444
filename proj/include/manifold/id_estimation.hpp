#pragma once

#include "manifold/dataset.hpp"
#include "manifold/neighbor_graph.hpp"
#include "manifold/neighbors.hpp"
#include "manifold/types.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace manifold {

enum class IdMethod { twonn_mle, twonn_fit, gride, decimation };

std::string_view to_string(IdMethod method);
IdMethod parse_id_method(std::string_view name);

/// Per-point ratios of second to first neighbor distance.
struct MuSample {
  std::vector<double> mu;
  /// Mean first-neighbor distance.
  double scale = 0.0;

  Index size() const noexcept { return static_cast<Index>(mu.size()); }
};

struct IdEstimate {
  double id = 0.0;
  double id_err = 0.0;
  double scale = 0.0;
  IdMethod method = IdMethod::twonn_mle;
  Index n_used = 0;
};

/// Estimates ordered by ascending scale.
struct IdScan {
  std::vector<IdEstimate> estimates;
};

/// Throws NumericalError when a ratio is not finite or equals 1 (tied
/// neighbor distances), which means the data still holds duplicates or ties.
MuSample compute_mu(const NeighborGraph& graph);

/// Closed-form maximum of the Pareto likelihood: id = n / sum(ln mu),
/// id_err = id / sqrt(n).
IdEstimate id_2nn_mle(const MuSample& sample);

/// Least-squares slope through the origin of -ln(1 - F) against ln(mu),
/// after dropping the largest `discard_fraction` of the sorted ratios.
IdEstimate id_2nn_fit(const MuSample& sample, double discard_fraction = 0.1);

struct DecimationOptions {
  Index repeats = 10;
  Seed seed = 0;
  NeighborOptions neighbors;
};

/// 2NN maximum likelihood on random subsamples. Each fraction yields the
/// mean id over repeats, their standard deviation as the error (the MLE
/// error when repeats == 1) and the mean first-neighbor distance as scale.
IdScan id_decimation(const Dataset& ds, std::span<const double> fractions, const DecimationOptions& options = {});

/// Maximum-likelihood id from ratios of the n2-th to the n1-th neighbor
/// distance. Returns {id, id_err}, the error from the observed information.
std::pair<double, double> gride_mle(std::span<const double> mu, Index n1, Index n2);

/// Gride scan with n2 = 2 * n1 for each requested n1.
IdScan id_gride(const NeighborGraph& graph, std::span<const Index> n1_values);

}  // namespace manifold
