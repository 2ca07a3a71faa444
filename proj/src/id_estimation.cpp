#include "manifold/id_estimation.hpp"

#include "manifold/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace manifold {

std::string_view to_string(IdMethod method) {
  switch (method) {
    case IdMethod::twonn_mle:
      return "twonn-mle";
    case IdMethod::twonn_fit:
      return "twonn-fit";
    case IdMethod::gride:
      return "gride";
    case IdMethod::decimation:
      return "decimation";
  }
  return "twonn-mle";
}

IdMethod parse_id_method(std::string_view name) {
  for (auto m : {IdMethod::twonn_mle, IdMethod::twonn_fit, IdMethod::gride, IdMethod::decimation})
    if (to_string(m) == name) return m;
  throw InputError(fmt::format("unknown id method '{}'", name));
}

namespace {

MuSample ratios(const NeighborGraph& graph, Index n1, Index n2) {
  if (graph.maxk() < n2)
    throw PreconditionError(fmt::format("ratio of neighbors {}/{} needs maxk >= {}, graph has {}", n2, n1, n2,
                                        graph.maxk()));
  MuSample sample;
  sample.mu.resize(static_cast<std::size_t>(graph.n_points()));
  double scale = 0.0;
  for (Index i = 0; i < graph.n_points(); ++i) {
    const double near = graph.distance(i, n1 - 1);
    const double mu = graph.distance(i, n2 - 1) / near;
    if (!std::isfinite(mu)) throw NumericalError(fmt::format("point {}: non-finite distance ratio", i));
    if (mu <= 1.0)
      throw NumericalError(fmt::format("point {}: neighbors {} and {} are equidistant (degenerate sample)", i, n1, n2));
    sample.mu[static_cast<std::size_t>(i)] = mu;
    scale += near;
  }
  sample.scale = scale / static_cast<double>(graph.n_points());
  return sample;
}

void check_ratios(std::span<const double> mu) {
  for (double m : mu)
    if (!std::isfinite(m) || m < 1.0) throw PreconditionError(fmt::format("invalid ratio {} (must be finite and > 1)", m));
}

}  // namespace

MuSample compute_mu(const NeighborGraph& graph) { return ratios(graph, 1, 2); }

IdEstimate id_2nn_mle(const MuSample& sample) {
  const Index n = sample.size();
  if (n < 2) throw PreconditionError("2NN estimator needs at least 2 ratios");
  check_ratios(sample.mu);
  double sum_log = 0.0;
  for (double m : sample.mu) sum_log += std::log(m);
  if (!(sum_log > 0.0)) throw NumericalError("all ratios equal 1; the likelihood has no maximum");
  const double id = static_cast<double>(n) / sum_log;
  return IdEstimate{id, id / std::sqrt(static_cast<double>(n)), sample.scale, IdMethod::twonn_mle, n};
}

IdEstimate id_2nn_fit(const MuSample& sample, double discard_fraction) {
  const Index n = sample.size();
  if (!(discard_fraction >= 0.0 && discard_fraction < 1.0))
    throw PreconditionError(fmt::format("discard fraction {} outside [0, 1)", discard_fraction));
  if (n < 3) throw PreconditionError("2NN regression needs at least 3 ratios");
  check_ratios(sample.mu);

  std::vector<double> sorted = sample.mu;
  std::sort(sorted.begin(), sorted.end());
  // the largest ratio has F = 1 and is never usable
  const Index dropped = static_cast<Index>(std::floor(static_cast<double>(n) * discard_fraction));
  const Index kept = std::min(n - dropped, n - 1);
  if (kept < 2) throw PreconditionError(fmt::format("only {} ratios left after discarding", kept));

  double sxx = 0.0, sxy = 0.0;
  for (Index i = 0; i < kept; ++i) {
    const double x = std::log(sorted[static_cast<std::size_t>(i)]);
    const double y = -std::log1p(-static_cast<double>(i + 1) / static_cast<double>(n));
    sxx += x * x;
    sxy += x * y;
  }
  if (!(sxx > 0.0)) throw NumericalError("all ratios equal 1; regression is undefined");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (Index i = 0; i < kept; ++i) {
    const double x = std::log(sorted[static_cast<std::size_t>(i)]);
    const double y = -std::log1p(-static_cast<double>(i + 1) / static_cast<double>(n));
    rss += (y - slope * x) * (y - slope * x);
  }
  const double err = std::sqrt(rss / static_cast<double>(kept - 1) / sxx);
  return IdEstimate{slope, err, sample.scale, IdMethod::twonn_fit, kept};
}

IdScan id_decimation(const Dataset& ds, std::span<const double> fractions, const DecimationOptions& options) {
  if (options.repeats < 1) throw PreconditionError("decimation needs at least one repeat");
  if (fractions.empty()) throw PreconditionError("decimation needs at least one fraction");
  const Index n = ds.n_points();
  const auto& points = ds.points();

  IdScan scan;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    const double fraction = fractions[f];
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw PreconditionError(fmt::format("fraction {} outside (0, 1]", fraction));
    const Index m = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
    if (m < 20)
      throw PreconditionError(fmt::format("fraction {} keeps {} points; at least 20 are required", fraction, m));

    std::vector<double> ids, scales;
    IdEstimate last;
    for (Index r = 0; r < options.repeats; ++r) {
      std::vector<Index> pick(static_cast<std::size_t>(n));
      std::iota(pick.begin(), pick.end(), Index{0});
      if (m < n) {
        std::seed_seq seq{static_cast<std::uint64_t>(options.seed), static_cast<std::uint64_t>(f),
                          static_cast<std::uint64_t>(r)};
        std::mt19937_64 rng(seq);
        std::shuffle(pick.begin(), pick.end(), rng);
        pick.resize(static_cast<std::size_t>(m));
        std::sort(pick.begin(), pick.end());
      }
      PointMatrix sub(m, points.cols());
      for (Index s = 0; s < m; ++s) sub.row(s) = points.row(pick[static_cast<std::size_t>(s)]);

      NeighborGraph graph;
      try {
        graph = compute_neighbors(sub, 2, options.neighbors);
      } catch (const PreconditionError& e) {
        throw PreconditionError(fmt::format("fraction {}: subsample has coinciding points ({})", fraction, e.what()));
      }
      last = id_2nn_mle(compute_mu(graph));
      ids.push_back(last.id);
      scales.push_back(last.scale);
    }

    const double reps = static_cast<double>(options.repeats);
    const double mean_id = std::accumulate(ids.begin(), ids.end(), 0.0) / reps;
    const double mean_scale = std::accumulate(scales.begin(), scales.end(), 0.0) / reps;
    double err = last.id_err;
    if (options.repeats > 1) {
      double ss = 0.0;
      for (double v : ids) ss += (v - mean_id) * (v - mean_id);
      err = std::sqrt(ss / (reps - 1.0));
    }
    scan.estimates.push_back(IdEstimate{mean_id, err, mean_scale, IdMethod::decimation, m});
  }
  std::stable_sort(scan.estimates.begin(), scan.estimates.end(),
                   [](const IdEstimate& a, const IdEstimate& b) { return a.scale < b.scale; });
  return scan;
}

std::pair<double, double> gride_mle(std::span<const double> mu, Index n1, Index n2) {
  if (n1 < 1 || n2 <= n1) throw PreconditionError(fmt::format("invalid neighbor orders n1={}, n2={}", n1, n2));
  if (mu.size() < 2) throw PreconditionError("Gride needs at least 2 ratios");
  check_ratios(mu);
  const double n = static_cast<double>(mu.size());
  const double shape = static_cast<double>(n2 - n1 - 1);
  const double power = static_cast<double>(n2 - 1);

  std::vector<double> logs(mu.size());
  double sum_log = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    logs[i] = std::log(mu[i]);
    if (!(logs[i] > 0.0)) throw NumericalError("ratio equal to 1 (tied neighbor distances)");
    sum_log += logs[i];
  }

  // Derivative of the log-likelihood and its slope; the likelihood is
  // strictly concave in the dimension so the root is unique.
  auto score = [&](double d, double* slope) {
    double s = n / d - power * sum_log;
    double h = -n / (d * d);
    if (shape > 0.0) {
      double acc = 0.0, acc2 = 0.0;
      for (double l : logs) {
        const double one_minus = -std::expm1(-d * l);
        acc += l / one_minus;
        acc2 += l * l * (1.0 - one_minus) / (one_minus * one_minus);
      }
      s += shape * acc;
      h -= shape * acc2;
    }
    if (slope) *slope = h;
    return s;
  };

  constexpr double kMaxId = 1000.0;
  double hi = kMaxId;
  if (score(hi, nullptr) > 0.0) throw NumericalError(fmt::format("Gride likelihood still increasing at id={}", kMaxId));
  double lo = 1.0;
  while (score(lo, nullptr) <= 0.0) {
    lo *= 0.5;
    if (lo < 1e-12) throw NumericalError("Gride likelihood has no interior maximum");
  }

  double d = 0.5 * (lo + hi);
  if (shape == 0.0) d = std::clamp(n / (power * sum_log), lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    double slope = 0.0;
    const double s = score(d, &slope);
    if (s == 0.0) break;
    if (s > 0.0)
      lo = d;
    else
      hi = d;
    double next = d - s / slope;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - d) <= 1e-14 * d || hi - lo <= 1e-14 * d;
    d = next;
    if (done) break;
  }
  double slope = 0.0;
  score(d, &slope);
  if (!(slope < 0.0) || !std::isfinite(d)) throw NumericalError("Gride maximisation failed");
  return {d, 1.0 / std::sqrt(-slope)};
}

IdScan id_gride(const NeighborGraph& graph, std::span<const Index> n1_values) {
  if (n1_values.empty()) throw PreconditionError("Gride needs at least one n1 value");
  IdScan scan;
  for (Index n1 : n1_values) {
    if (n1 < 1 || 2 * n1 > graph.maxk())
      throw PreconditionError(fmt::format("Gride with n1={} needs maxk >= {}, graph has {}", n1, 2 * n1, graph.maxk()));
    const MuSample sample = ratios(graph, n1, 2 * n1);
    const auto [id, err] = gride_mle(sample.mu, n1, 2 * n1);
    scan.estimates.push_back(IdEstimate{id, err, sample.scale, IdMethod::gride, sample.size()});
  }
  std::stable_sort(scan.estimates.begin(), scan.estimates.end(),
                   [](const IdEstimate& a, const IdEstimate& b) { return a.scale < b.scale; });
  return scan;
}

}  // namespace manifold
