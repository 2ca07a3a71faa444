#include "manifold/synthetic.hpp"

#include "manifold/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

namespace manifold::synthetic {

PointMatrix uniform_hypercube(Index n, Index dims, Seed seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointMatrix out(n, dims);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < dims; ++k) out(i, k) = u(rng);
  return out;
}

LabelledPoints gaussian_mixture(Index n, const PointMatrix& means, const std::vector<double>& sigmas,
                                const std::vector<double>& weights, Seed seed) {
  const auto k = static_cast<std::size_t>(means.rows());
  if (sigmas.size() != k || weights.size() != k) throw PreconditionError("mixture parameters differ in length");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<Index> pick(weights.begin(), weights.end());
  std::normal_distribution<double> g(0.0, 1.0);
  LabelledPoints out{PointMatrix(n, means.cols()), std::vector<Index>(static_cast<std::size_t>(n))};
  for (Index i = 0; i < n; ++i) {
    const Index c = pick(rng);
    out.labels[static_cast<std::size_t>(i)] = c;
    for (Index d = 0; d < means.cols(); ++d) out.points(i, d) = means(c, d) + sigmas[static_cast<std::size_t>(c)] * g(rng);
  }
  return out;
}

LabelledPoints two_gaussians_2d(Index n, Seed seed) {
  PointMatrix means(2, 2);
  means << -3.0, 0.0, 3.0, 0.0;
  return gaussian_mixture(n, means, {1.0, 1.0}, {1.0, 1.0}, seed);
}

LabelledPoints two_gaussians_1d(Index n, Seed seed) {
  PointMatrix means(2, 1);
  means << -4.0, 4.0;
  return gaussian_mixture(n, means, {1.0, 1.0}, {1.0, 1.0}, seed);
}

PointMatrix spiral(Index n, double turns, double gap, Seed seed) {
  // r = b * theta; for theta >= 2 pi the arc length is close to b theta^2 / 2
  const double b = gap / (2.0 * std::numbers::pi);
  const double t0 = 2.0 * std::numbers::pi;
  const double t1 = t0 + 2.0 * std::numbers::pi * turns;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(t0 * t0, t1 * t1);
  PointMatrix out(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double theta = std::sqrt(u(rng));
    out(i, 0) = b * theta * std::cos(theta);
    out(i, 1) = b * theta * std::sin(theta);
  }
  return out;
}

PointMatrix flat_torus(Index n, Seed seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  PointMatrix out(n, 4);
  for (Index i = 0; i < n; ++i) {
    const double a = two_pi * u(rng);
    const double b = two_pi * u(rng);
    out.row(i) << std::cos(a) / two_pi, std::sin(a) / two_pi, std::cos(b) / two_pi, std::sin(b) / two_pi;
  }
  return out;
}

LabelledPoints mobius(Index n, Seed seed, const MobiusOptions& options) {
  if (options.ambient_dims < 3) throw PreconditionError("Moebius embedding needs at least 3 dimensions");
  const double two_pi = 2.0 * std::numbers::pi;
  const double radius = options.major_radius;
  const double half = options.half_width;
  // strip coordinates: arc length s in [0, 2 pi R) along the band, v across it
  constexpr int kClusters = 8;
  const double weights[kClusters] = {1.0, 1.4, 0.8, 1.2, 1.0, 0.7, 1.3, 0.9};
  const double sigmas[kClusters] = {0.50, 0.58, 0.46, 0.55, 0.50, 0.44, 0.60, 0.52};
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(std::begin(weights), std::end(weights));
  std::normal_distribution<double> g(0.0, 1.0);

  LabelledPoints out{PointMatrix(n, options.ambient_dims), std::vector<Index>(static_cast<std::size_t>(n))};
  const double length = two_pi * radius;
  for (Index i = 0; i < n; ++i) {
    const int c = pick(rng);
    const double s0 = length * (c + 0.5) / kClusters;
    const double v0 = (c % 2 == 0 ? 0.45 : -0.45) * half;
    double s = 0.0, v = 0.0;
    do {
      s = s0 + sigmas[c] * g(rng);
      v = v0 + sigmas[c] * g(rng);
    } while (std::abs(v) > half);
    s = std::fmod(s + length, length);
    const double u = s / radius;
    const double ring = radius + v * std::cos(0.5 * u);
    out.labels[static_cast<std::size_t>(i)] = c;
    out.points(i, 0) = ring * std::cos(u);
    out.points(i, 1) = ring * std::sin(u);
    out.points(i, 2) = v * std::sin(0.5 * u);
    for (Index k = 3; k < options.ambient_dims; ++k) out.points(i, k) = 0.0;
    for (Index k = 0; k < options.ambient_dims; ++k) out.points(i, k) += options.noise * g(rng);
  }
  return out;
}

LabelledPoints demo(std::string_view name, Index n, Seed seed) {
  if (n < 3) throw PreconditionError("demo data needs at least 3 points");
  if (name == "gaussian-mix") return two_gaussians_2d(n, seed);
  if (name == "spiral") return {spiral(n, 20.0, 0.05, seed), std::vector<Index>(static_cast<std::size_t>(n), -1)};
  if (name == "mobius") return mobius(n, seed);
  constexpr std::string_view prefix = "uniform-";
  if (name.starts_with(prefix)) {
    Index dims = 0;
    const auto digits = name.substr(prefix.size());
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dims);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && dims >= 1)
      return {uniform_hypercube(n, dims, seed), std::vector<Index>(static_cast<std::size_t>(n), -1)};
  }
  throw InputError(fmt::format("unknown demo '{}' (uniform-<d>, gaussian-mix, spiral, mobius)", name));
}

}  // namespace manifold::synthetic
