#include "manifold/metric_comparison.hpp"

#include "manifold/error.hpp"
#include "manifold/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace manifold {

namespace {

// Writes ranks of row i given its distances (entry i ignored).
void rank_row(Index i, const std::vector<double>& row, RowMatrix<std::int32_t>& ranks, IndexMatrix& nearest) {
  const Index n = static_cast<Index>(row.size());
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n - 1));
  for (Index j = 0; j < n; ++j)
    if (j != i) order.push_back(j);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double da = row[static_cast<std::size_t>(a)];
    const double db = row[static_cast<std::size_t>(b)];
    return da < db || (da == db && a < b);
  });
  ranks(i, i) = 0;
  for (std::size_t r = 0; r < order.size(); ++r) ranks(i, order[r]) = static_cast<std::int32_t>(r + 1);
  nearest(i, 0) = order.front();
}

}  // namespace

RankTable RankTable::from_distances(const DistanceMatrix& distances, int workers) {
  const Index n = distances.rows();
  if (distances.cols() != n) throw PreconditionError("distance matrix must be square");
  if (n < 2) throw PreconditionError("rank table needs at least 2 points");
  if (n > std::numeric_limits<std::int32_t>::max()) throw PreconditionError("too many points for a dense rank table");
  RankTable t;
  t.n_ = n;
  t.dense_ = true;
  t.ranks_.resize(n, n);
  t.neighbors_.resize(n, 1);
  parallel_for(n, workers, [&](Index i) {
    std::vector<double> row(distances.row(i).begin(), distances.row(i).end());
    rank_row(i, row, t.ranks_, t.neighbors_);
  });
  return t;
}

RankTable RankTable::from_points(const PointMatrix& points, int workers) {
  const Index n = points.rows();
  if (n < 2) throw PreconditionError("rank table needs at least 2 points");
  RankTable t;
  t.n_ = n;
  t.dense_ = true;
  t.ranks_.resize(n, n);
  t.neighbors_.resize(n, 1);
  const Metric metric = Metric::euclidean();
  parallel_for(n, workers, [&](Index i) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = metric.reduced(points.row(i), points.row(j));
    rank_row(i, row, t.ranks_, t.neighbors_);
  });
  return t;
}

RankTable RankTable::from_graph(const NeighborGraph& graph) {
  RankTable t;
  t.n_ = graph.n_points();
  t.dense_ = false;
  t.neighbors_ = graph.indices();
  return t;
}

std::optional<Index> RankTable::rank(Index i, Index j) const {
  if (i == j) return 0;
  if (dense_) return ranks_(i, j);
  for (Index r = 0; r < neighbors_.cols(); ++r)
    if (neighbors_(i, r) == j) return r + 1;
  return std::nullopt;
}

double neighborhood_overlap(const NeighborGraph& a, const NeighborGraph& b, Index k) {
  if (a.n_points() != b.n_points())
    throw PreconditionError(fmt::format("graphs cover {} and {} points", a.n_points(), b.n_points()));
  if (k < 1 || k > std::min(a.maxk(), b.maxk()))
    throw PreconditionError(fmt::format("k={} outside [1, {}]", k, std::min(a.maxk(), b.maxk())));
  const Index n = a.n_points();
  Index shared = 0;
  std::vector<Index> ra(static_cast<std::size_t>(k)), rb(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < k; ++r) {
      ra[static_cast<std::size_t>(r)] = a.neighbor(i, r);
      rb[static_cast<std::size_t>(r)] = b.neighbor(i, r);
    }
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    std::size_t x = 0, y = 0;
    while (x < ra.size() && y < rb.size()) {
      if (ra[x] == rb[y]) {
        ++shared;
        ++x;
        ++y;
      } else if (ra[x] < rb[y]) {
        ++x;
      } else {
        ++y;
      }
    }
  }
  return static_cast<double>(shared) / (static_cast<double>(n) * static_cast<double>(k));
}

namespace {

std::pair<double, Index> directed_imbalance(const RankTable& from, const RankTable& to) {
  const Index n = from.n_points();
  Index sum = 0;
  Index truncated = 0;
  for (Index i = 0; i < n; ++i) {
    const auto r = to.rank(i, from.nearest(i));
    if (r) {
      sum += *r;
    } else {
      sum += to.max_rank() + 1;
      ++truncated;
    }
  }
  const double nd = static_cast<double>(n);
  return {2.0 * static_cast<double>(sum) / (nd * nd), truncated};
}

}  // namespace

ImbalanceResult information_imbalance(const RankTable& a, const RankTable& b) {
  if (a.n_points() != b.n_points())
    throw PreconditionError(fmt::format("rank tables cover {} and {} points", a.n_points(), b.n_points()));
  if (a.n_points() < 3) throw PreconditionError("information imbalance needs at least 3 points");
  ImbalanceResult out;
  out.n = a.n_points();
  std::tie(out.delta_ab, out.truncated_ab) = directed_imbalance(a, b);
  std::tie(out.delta_ba, out.truncated_ba) = directed_imbalance(b, a);
  return out;
}

std::vector<Index> evaluation_sample(Index n, Index size, Seed seed) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  if (size >= n) return rows;
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(static_cast<std::size_t>(size));
  std::sort(rows.begin(), rows.end());
  return rows;
}

FeatureSelection greedy_feature_selection(const PointMatrix& points, std::span<const Index> target_columns,
                                          const FeatureSelectionOptions& options) {
  if (target_columns.empty()) throw PreconditionError("target needs at least one column");
  for (Index c : target_columns)
    if (c < 0 || c >= points.cols()) throw PreconditionError(fmt::format("target column {} out of range", c));
  if (options.sample < 3) throw PreconditionError("evaluation sample needs at least 3 points");
  const auto rows = evaluation_sample(points.rows(), options.sample, options.seed);
  PointMatrix target(static_cast<Index>(rows.size()), static_cast<Index>(target_columns.size()));
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t c = 0; c < target_columns.size(); ++c)
      target(static_cast<Index>(s), static_cast<Index>(c)) = points(rows[s], target_columns[c]);
  return greedy_feature_selection(points, rows, RankTable::from_points(target, options.workers), options);
}

FeatureSelection greedy_feature_selection(const PointMatrix& points, std::span<const Index> sample_rows,
                                          const RankTable& target, const FeatureSelectionOptions& options) {
  const Index dims = points.cols();
  const Index n = static_cast<Index>(sample_rows.size());
  if (dims < 2) throw PreconditionError("feature selection needs at least 2 features");
  if (options.max_size < 1 || options.max_size > dims)
    throw PreconditionError(fmt::format("max_size={} outside [1, {}]", options.max_size, dims));
  if (target.n_points() != n || !target.dense())
    throw PreconditionError("target must be a dense rank table over the sampled rows");
  if (n < 3) throw PreconditionError("feature selection needs at least 3 sampled points");

  PointMatrix x(n, dims);
  for (Index s = 0; s < n; ++s) x.row(s) = points.row(sample_rows[static_cast<std::size_t>(s)]);

  // squared distances over the current prefix
  DistanceMatrix base = DistanceMatrix::Zero(n, n);
  std::vector<char> used(static_cast<std::size_t>(dims), 0);
  std::vector<Index> fwd_rank(static_cast<std::size_t>(n)), bwd_rank(static_cast<std::size_t>(n));
  const double norm = 2.0 / (static_cast<double>(n) * static_cast<double>(n));

  FeatureSelection out;
  double best_fwd = std::numeric_limits<double>::infinity();
  double best_bwd = 0.0;
  Index best_size = 0;
  for (Index size = 1; size <= options.max_size; ++size) {
    Index chosen = -1;
    double chosen_fwd = 0.0, chosen_bwd = 0.0;
    for (Index f = 0; f < dims; ++f) {
      if (used[static_cast<std::size_t>(f)]) continue;
      const auto col = x.col(f);
      std::vector<char> any_gap(static_cast<std::size_t>(n), 0);
      parallel_for(n, options.workers, [&](Index i) {
        const Index t = target.nearest(i);
        const double gt = col(i) - col(t);
        const double dt = base(i, t) + gt * gt;
        double best = std::numeric_limits<double>::infinity();
        Index nearest = -1;
        Index below = 0;
        bool gap = false;
        for (Index j = 0; j < n; ++j) {
          if (j == i) continue;
          const double g = col(i) - col(j);
          const double d = base(i, j) + g * g;
          gap = gap || d != 0.0;
          if (d < best) {
            best = d;
            nearest = j;
          }
          if (d < dt || (d == dt && j < t)) ++below;
        }
        fwd_rank[static_cast<std::size_t>(i)] = *target.rank(i, nearest);
        bwd_rank[static_cast<std::size_t>(i)] = below + 1;
        any_gap[static_cast<std::size_t>(i)] = gap;
      });
      if (std::none_of(any_gap.begin(), any_gap.end(), [](char g) { return g != 0; })) continue;
      const double fwd = norm * static_cast<double>(std::accumulate(fwd_rank.begin(), fwd_rank.end(), Index{0}));
      const double bwd = norm * static_cast<double>(std::accumulate(bwd_rank.begin(), bwd_rank.end(), Index{0}));
      if (chosen < 0 || fwd < chosen_fwd) {
        chosen = f;
        chosen_fwd = fwd;
        chosen_bwd = bwd;
      }
    }
    if (chosen < 0)
      throw PreconditionError(fmt::format("every remaining feature gives all-tied distances at size {}", size));

    used[static_cast<std::size_t>(chosen)] = 1;
    const auto col = x.col(chosen);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) base(i, j) += (col(i) - col(j)) * (col(i) - col(j));

    if (chosen_fwd < best_fwd) {
      best_fwd = chosen_fwd;
      best_bwd = chosen_bwd;
      best_size = size;
    }
    out.order.push_back(chosen);
    out.curve.push_back(SelectionStep{size, chosen, chosen_fwd, chosen_bwd, best_size, best_fwd, best_bwd});
  }
  return out;
}

}  // namespace manifold
