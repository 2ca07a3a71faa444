#pragma once

#include "manifold/types.hpp"

#include <string_view>
#include <vector>

namespace manifold::synthetic {

/// Points with the generating component of each row (-1 when unlabelled).
struct LabelledPoints {
  PointMatrix points;
  std::vector<Index> labels;
};

/// Uniform in [0, 1]^dims.
PointMatrix uniform_hypercube(Index n, Index dims, Seed seed);

/// Isotropic Gaussian mixture; component c has mean means.row(c), standard
/// deviation sigmas[c] and relative weight weights[c].
LabelledPoints gaussian_mixture(Index n, const PointMatrix& means, const std::vector<double>& sigmas,
                                const std::vector<double>& weights, Seed seed);

/// Two unit Gaussians in the plane centred at (-3, 0) and (3, 0).
LabelledPoints two_gaussians_2d(Index n, Seed seed);

/// Two unit Gaussians on the line centred at -4 and 4.
LabelledPoints two_gaussians_1d(Index n, Seed seed);

/// Archimedean spiral with `turns` windings spaced `gap` apart, sampled
/// uniformly in arc length.
PointMatrix spiral(Index n, double turns, double gap, Seed seed);

/// Uniform sample of the flat unit-area torus, isometrically embedded in R^4.
PointMatrix flat_torus(Index n, Seed seed);

struct MobiusOptions {
  Index ambient_dims = 50;
  double noise = 2e-4;
  double major_radius = 3.0;
  double half_width = 1.0;
};

/// Eight Gaussian clusters on a flat strip, twisted into a Moebius band in
/// R^3 and padded with isotropic noise to `ambient_dims` coordinates.
LabelledPoints mobius(Index n, Seed seed, const MobiusOptions& options = {});

/// Named generators: "uniform-<d>", "gaussian-mix", "spiral", "mobius".
LabelledPoints demo(std::string_view name, Index n, Seed seed);

}  // namespace manifold::synthetic
