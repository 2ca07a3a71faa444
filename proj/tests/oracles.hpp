#pragma once

// Independent reference computations used by the tests. Everything here is
// written directly from the definitions, without going through the library.

#include "manifold/types.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using manifold::Index;
using manifold::PointMatrix;

inline double minkowski(const PointMatrix& x, Index i, Index j, double p) {
  double acc = 0.0;
  for (Index k = 0; k < x.cols(); ++k) acc += std::pow(std::abs(x(i, k) - x(j, k)), p);
  return std::pow(acc, 1.0 / p);
}

inline double euclid(const PointMatrix& x, Index i, Index j) {
  double acc = 0.0;
  for (Index k = 0; k < x.cols(); ++k) acc += (x(i, k) - x(j, k)) * (x(i, k) - x(j, k));
  return std::sqrt(acc);
}

/// Full sorted neighbor row of i: (distance, index) ascending.
inline std::vector<std::pair<double, Index>> sorted_row(const PointMatrix& x, Index i, double p = 2.0) {
  std::vector<std::pair<double, Index>> row;
  for (Index j = 0; j < x.rows(); ++j)
    if (j != i) row.emplace_back(p == 2.0 ? euclid(x, i, j) : minkowski(x, i, j, p), j);
  std::sort(row.begin(), row.end());
  return row;
}

/// Pareto(id) ratios by inversion: mu = U^(-1/id).
inline std::vector<double> pareto_sample(Index n, double id, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> mu(static_cast<std::size_t>(n));
  for (auto& m : mu) m = std::pow(1.0 - u(rng), -1.0 / id);
  return mu;
}

inline double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

/// Log-density of the equal-weight unit Gaussians at -4 and 4.
inline double log_density_1d_mixture(double x) {
  return std::log(0.5 * normal_pdf(x, -4.0, 1.0) + 0.5 * normal_pdf(x, 4.0, 1.0));
}

/// Log-density of the equal-weight unit Gaussians at (-3, 0) and (3, 0).
inline double log_density_2d_mixture(double x, double y) {
  return std::log(0.5 * normal_pdf(x, -3.0, 1.0) * normal_pdf(y, 0.0, 1.0) +
                  0.5 * normal_pdf(x, 3.0, 1.0) * normal_pdf(y, 0.0, 1.0));
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

/// Pair-counting F1 between two labelings.
inline double pairwise_f1(const std::vector<Index>& predicted, const std::vector<Index>& truth) {
  std::map<std::pair<Index, Index>, double> joint;
  std::map<Index, double> pa, pb;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    joint[{predicted[i], truth[i]}] += 1;
    pa[predicted[i]] += 1;
    pb[truth[i]] += 1;
  }
  auto pairs = [](double n) { return n * (n - 1.0) / 2.0; };
  double tp = 0, np = 0, nt = 0;
  for (const auto& [key, n] : joint) tp += pairs(n);
  for (const auto& [key, n] : pa) np += pairs(n);
  for (const auto& [key, n] : pb) nt += pairs(n);
  const double precision = tp / np, recall = tp / nt;
  return 2.0 * precision * recall / (precision + recall);
}

/// True when every cluster of `coarse` is a union of clusters of `fine`.
inline bool nested(const std::vector<Index>& fine, const std::vector<Index>& coarse) {
  std::map<Index, Index> parent;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    auto [it, inserted] = parent.emplace(fine[i], coarse[i]);
    if (!inserted && it->second != coarse[i]) return false;
  }
  return true;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("manifold-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
