#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace manifold {

using Index = Eigen::Index;

/// Row-major so that a single point is a contiguous span.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PointMatrix = RowMatrix<double>;
using DistanceMatrix = RowMatrix<double>;
using IndexMatrix = RowMatrix<Index>;

using Seed = std::uint64_t;

}  // namespace manifold
