#include "manifold/clustering.hpp"

#include "manifold/error.hpp"
#include "manifold/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

namespace manifold {

namespace {

constexpr double kNoBorder = -std::numeric_limits<double>::infinity();

std::vector<Index> density_order(std::span<const double> log_rho) {
  std::vector<Index> order(log_rho.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return denser(log_rho, a, b); });
  return order;
}

void check_same_size(const DensityField& density, const NeighborGraph& graph) {
  if (density.size() != graph.n_points())
    throw PreconditionError(
        fmt::format("density has {} points but the graph has {}", density.size(), graph.n_points()));
}

// Dijkstra from `source` over the symmetrised graph, stopping at the first
// settled point that is denser than the source.
std::optional<std::pair<Index, double>> nearest_denser_along_graph(
    Index source, std::span<const double> log_rho, const NeighborGraph& graph,
    const std::vector<std::vector<std::pair<Index, double>>>& reverse) {
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::map<Index, double> best;
  queue.emplace(0.0, source);
  best[source] = 0.0;
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > best[u]) continue;
    if (u != source && denser(log_rho, u, source)) return std::make_pair(u, d);
    auto relax = [&](Index v, double w) {
      const double nd = d + w;
      auto it = best.find(v);
      if (it == best.end() || nd < it->second) {
        best[v] = nd;
        queue.emplace(nd, v);
      }
    };
    for (Index r = 0; r < graph.maxk(); ++r) relax(graph.neighbor(u, r), graph.distance(u, r));
    for (const auto& [v, w] : reverse[static_cast<std::size_t>(u)]) relax(v, w);
  }
  return std::nullopt;
}

}  // namespace

DecisionGraph decision_graph(const DensityField& density, const NeighborGraph& graph, const PointMatrix* points) {
  check_same_size(density, graph);
  const Index n = graph.n_points();
  const std::span<const double> rho(density.log_rho);
  if (points && points->rows() != n) throw PreconditionError("point matrix does not match the graph");
  if (points && graph.metric().kind() == Metric::Kind::precomputed) points = nullptr;

  DecisionGraph dg;
  dg.delta.assign(static_cast<std::size_t>(n), 0.0);
  dg.log_rho = density.log_rho;
  dg.log_rho_err = density.log_rho_err;
  dg.nearest_higher.assign(static_cast<std::size_t>(n), std::nullopt);

  Index top = 0;
  for (Index i = 1; i < n; ++i)
    if (denser(rho, i, top)) top = i;

  std::vector<Index> orphans;
  for (Index i = 0; i < n; ++i) {
    if (i == top) {
      dg.delta[static_cast<std::size_t>(i)] = graph.distance(i, graph.maxk() - 1);
      continue;
    }
    bool found = false;
    for (Index r = 0; r < graph.maxk(); ++r) {
      const Index j = graph.neighbor(i, r);
      if (denser(rho, j, i)) {
        dg.delta[static_cast<std::size_t>(i)] = graph.distance(i, r);
        dg.nearest_higher[static_cast<std::size_t>(i)] = j;
        found = true;
        break;
      }
    }
    if (!found) orphans.push_back(i);
  }
  if (orphans.empty()) return dg;

  if (points) {
    const Metric& metric = graph.metric();
    for (Index i : orphans) {
      double best = std::numeric_limits<double>::infinity();
      Index best_j = top;
      for (Index j = 0; j < n; ++j) {
        if (!denser(rho, j, i)) continue;
        const double d = metric.distance(points->row(i), points->row(j));
        if (d < best || (d == best && j < best_j)) {
          best = d;
          best_j = j;
        }
      }
      dg.delta[static_cast<std::size_t>(i)] = best;
      dg.nearest_higher[static_cast<std::size_t>(i)] = best_j;
    }
    return dg;
  }

  std::vector<std::vector<std::pair<Index, double>>> reverse(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    for (Index r = 0; r < graph.maxk(); ++r)
      reverse[static_cast<std::size_t>(graph.neighbor(i, r))].emplace_back(i, graph.distance(i, r));
  for (Index i : orphans) {
    const auto hit = nearest_denser_along_graph(i, rho, graph, reverse);
    // a disconnected component whose maximum is not global attaches to the top
    dg.nearest_higher[static_cast<std::size_t>(i)] = hit ? hit->first : top;
    dg.delta[static_cast<std::size_t>(i)] = hit ? hit->second : std::numeric_limits<double>::infinity();
  }
  return dg;
}

std::vector<Index> ClusterResult::populations() const {
  std::vector<Index> pop(centers.size(), 0);
  for (Index l : labels) ++pop[static_cast<std::size_t>(l)];
  return pop;
}

namespace {

// Labels every point from seeded centers along nearest-denser links.
std::vector<Index> assign_from_centers(std::span<const double> log_rho, std::span<const Index> centers,
                                       const std::vector<std::optional<Index>>& nearest_higher) {
  const Index n = static_cast<Index>(log_rho.size());
  std::vector<Index> labels(static_cast<std::size_t>(n), -1);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const Index p = centers[c];
    if (p < 0 || p >= n) throw PreconditionError(fmt::format("center {} out of range", p));
    if (labels[static_cast<std::size_t>(p)] != -1) throw PreconditionError(fmt::format("center {} given twice", p));
    labels[static_cast<std::size_t>(p)] = static_cast<Index>(c);
  }
  for (Index i : density_order(log_rho)) {
    auto& label = labels[static_cast<std::size_t>(i)];
    if (label != -1) continue;
    const auto& up = nearest_higher[static_cast<std::size_t>(i)];
    if (!up)
      throw PreconditionError(
          fmt::format("point {} is the density maximum but not a center; no center can be reached", i));
    label = labels[static_cast<std::size_t>(*up)];
  }
  return labels;
}

// For every pair of clusters sharing a border, the densest border point.
std::map<std::pair<Index, Index>, Index> find_saddles(std::span<const Index> labels, const DensityField& density,
                                                       const NeighborGraph& graph) {
  const std::span<const double> rho(density.log_rho);
  auto half = [&](Index i) {
    return std::clamp<Index>(density.k_used[static_cast<std::size_t>(i)] / 2, 1, graph.maxk());
  };
  std::map<std::pair<Index, Index>, Index> saddles;
  for (Index i = 0; i < graph.n_points(); ++i) {
    const Index ci = labels[static_cast<std::size_t>(i)];
    const Index hi = half(i);
    for (Index r = 0; r < hi; ++r) {
      const Index j = graph.neighbor(i, r);
      const Index cj = labels[static_cast<std::size_t>(j)];
      if (cj == ci) continue;
      const Index hj = half(j);
      bool mutual = false;
      for (Index s = 0; s < hj && !mutual; ++s) mutual = graph.neighbor(j, s) == i;
      if (!mutual) continue;
      const auto key = std::minmax(ci, cj);
      auto [it, inserted] = saddles.try_emplace({key.first, key.second}, i);
      if (!inserted && denser(rho, i, it->second)) it->second = i;
    }
  }
  return saddles;
}

}  // namespace

ClusterResult dp_cluster(const DecisionGraph& dg, std::span<const Index> centers) {
  if (centers.empty()) throw PreconditionError("at least one center is required");
  ClusterResult result;
  result.labels = assign_from_centers(dg.log_rho, centers, dg.nearest_higher);
  result.centers.assign(centers.begin(), centers.end());
  const Index k = static_cast<Index>(centers.size());
  for (Index c : result.centers) {
    result.peak_log_rho.push_back(dg.log_rho[static_cast<std::size_t>(c)]);
    result.peak_err.push_back(dg.log_rho_err.empty() ? 0.0 : dg.log_rho_err[static_cast<std::size_t>(c)]);
  }
  result.saddle_log_rho = Eigen::MatrixXd::Constant(k, k, kNoBorder);
  result.saddle_err = Eigen::MatrixXd::Zero(k, k);
  return result;
}

void attach_saddles(ClusterResult& result, const DensityField& density, const NeighborGraph& graph) {
  check_same_size(density, graph);
  const Index k = result.n_clusters();
  result.saddle_log_rho = Eigen::MatrixXd::Constant(k, k, kNoBorder);
  result.saddle_err = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [pair, point] : find_saddles(result.labels, density, graph)) {
    const double h = density.log_rho[static_cast<std::size_t>(point)];
    const double e = density.log_rho_err[static_cast<std::size_t>(point)];
    result.saddle_log_rho(pair.first, pair.second) = result.saddle_log_rho(pair.second, pair.first) = h;
    result.saddle_err(pair.first, pair.second) = result.saddle_err(pair.second, pair.first) = e;
  }
}

ClusterResult adp_cluster(const DensityField& density, const NeighborGraph& graph, double z) {
  check_same_size(density, graph);
  if (!(z > 0.0)) throw PreconditionError(fmt::format("z must be positive, got {}", z));
  if (static_cast<Index>(density.k_used.size()) != density.size() ||
      static_cast<Index>(density.log_rho_err.size()) != density.size())
    throw PreconditionError("density field lacks per-point errors or neighborhood sizes");
  const Index n = graph.n_points();
  const std::span<const double> rho(density.log_rho);
  const std::span<const double> err(density.log_rho_err);

  // putative peaks and nearest denser neighbor of everything else
  std::vector<std::optional<Index>> up(static_cast<std::size_t>(n));
  std::vector<char> is_peak(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    const Index k = std::clamp<Index>(density.k_used[static_cast<std::size_t>(i)], 1, graph.maxk());
    for (Index r = 0; r < k; ++r) {
      const Index j = graph.neighbor(i, r);
      if (denser(rho, j, i)) {
        up[static_cast<std::size_t>(i)] = j;
        break;
      }
    }
    if (!up[static_cast<std::size_t>(i)]) is_peak[static_cast<std::size_t>(i)] = 1;
  }
  std::vector<Index> peaks;
  for (Index i : density_order(rho))
    if (is_peak[static_cast<std::size_t>(i)]) peaks.push_back(i);
  const std::vector<Index> prelim = assign_from_centers(rho, peaks, up);

  ClusterResult result;
  result.z_used = z;
  const Index n_peaks = static_cast<Index>(peaks.size());

  // border map per cluster: other cluster -> saddle point
  std::vector<std::map<Index, Index>> borders(static_cast<std::size_t>(n_peaks));
  const auto saddles = find_saddles(prelim, density, graph);
  for (const auto& [pair, point] : saddles) {
    borders[static_cast<std::size_t>(pair.first)][pair.second] = point;
    borders[static_cast<std::size_t>(pair.second)][pair.first] = point;
  }
  if (n_peaks > 1 && saddles.empty())
    result.warnings.push_back(fmt::format(
        "{} putative peaks share no border; maxk is likely too small and many peaks may be fictitious", n_peaks));

  // Peak of cluster c is peaks[c]; clusters with lower ids are denser. Each
  // peak of a pair must clear the saddle on its own, so a pair is as
  // significant as its weaker end.
  auto significance = [&](Index c, Index saddle) {
    const Index p = peaks[static_cast<std::size_t>(c)];
    const double gap = rho[static_cast<std::size_t>(p)] - rho[static_cast<std::size_t>(saddle)];
    const double scale = err[static_cast<std::size_t>(p)] + err[static_cast<std::size_t>(saddle)];
    if (scale > 0.0) return gap / scale;
    return gap > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  };
  auto ratio = [&](Index a, Index b, Index saddle) { return std::min(significance(a, saddle), significance(b, saddle)); };

  using Entry = std::tuple<double, Index, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (const auto& [pair, point] : saddles) queue.emplace(ratio(pair.first, pair.second, point), pair.first, pair.second);

  std::vector<Index> merged_into(static_cast<std::size_t>(n_peaks));
  std::iota(merged_into.begin(), merged_into.end(), Index{0});
  std::vector<char> alive(static_cast<std::size_t>(n_peaks), 1);

  while (!queue.empty()) {
    const auto [r, a, b] = queue.top();
    if (!(r <= z)) break;
    queue.pop();
    if (!alive[static_cast<std::size_t>(a)] || !alive[static_cast<std::size_t>(b)]) continue;
    auto& ba = borders[static_cast<std::size_t>(a)];
    const auto it = ba.find(b);
    if (it == ba.end() || ratio(a, b, it->second) != r) continue;

    // a < b, so a holds the higher peak and absorbs b
    ba.erase(it);
    auto& bb = borders[static_cast<std::size_t>(b)];
    bb.erase(a);
    for (const auto& [other, point] : bb) {
      auto& bo = borders[static_cast<std::size_t>(other)];
      bo.erase(b);
      auto [slot, inserted] = ba.try_emplace(other, point);
      if (!inserted && denser(rho, point, slot->second)) slot->second = point;
      bo[a] = slot->second;
    }
    bb.clear();
    alive[static_cast<std::size_t>(b)] = 0;
    merged_into[static_cast<std::size_t>(b)] = a;
    for (const auto& [other, point] : ba) queue.emplace(ratio(std::min(a, other), std::max(a, other), point),
                                                        std::min(a, other), std::max(a, other));
  }

  // final numbering follows the peak order, so it is by decreasing density
  std::vector<Index> final_id(static_cast<std::size_t>(n_peaks), -1);
  for (Index c = 0; c < n_peaks; ++c) {
    if (!alive[static_cast<std::size_t>(c)]) continue;
    final_id[static_cast<std::size_t>(c)] = static_cast<Index>(result.centers.size());
    result.centers.push_back(peaks[static_cast<std::size_t>(c)]);
  }
  auto root = [&](Index c) {
    while (merged_into[static_cast<std::size_t>(c)] != c) c = merged_into[static_cast<std::size_t>(c)];
    return c;
  };
  std::vector<Index> cluster_of(static_cast<std::size_t>(n_peaks));
  for (Index c = 0; c < n_peaks; ++c) cluster_of[static_cast<std::size_t>(c)] = final_id[static_cast<std::size_t>(root(c))];

  result.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    result.labels[static_cast<std::size_t>(i)] = cluster_of[static_cast<std::size_t>(prelim[static_cast<std::size_t>(i)])];

  const Index k = result.n_clusters();
  for (Index c : result.centers) {
    result.peak_log_rho.push_back(rho[static_cast<std::size_t>(c)]);
    result.peak_err.push_back(err[static_cast<std::size_t>(c)]);
  }
  result.saddle_log_rho = Eigen::MatrixXd::Constant(k, k, kNoBorder);
  result.saddle_err = Eigen::MatrixXd::Zero(k, k);
  for (Index c = 0; c < n_peaks; ++c) {
    if (!alive[static_cast<std::size_t>(c)]) continue;
    for (const auto& [other, point] : borders[static_cast<std::size_t>(c)]) {
      const Index fa = final_id[static_cast<std::size_t>(c)];
      const Index fb = final_id[static_cast<std::size_t>(other)];
      result.saddle_log_rho(fa, fb) = rho[static_cast<std::size_t>(point)];
      result.saddle_err(fa, fb) = err[static_cast<std::size_t>(point)];
    }
  }
  return result;
}

Dendrogram dendrogram(const ClusterResult& result) {
  const Index k = result.n_clusters();
  if (k < 1) throw PreconditionError("dendrogram needs at least one cluster");
  Dendrogram out;
  out.peak_height = result.peak_log_rho;

  struct Link {
    double h;
    Index a, b;
  };
  std::vector<Link> candidates;
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b)
      if (result.saddle_log_rho(a, b) > kNoBorder) candidates.push_back({result.saddle_log_rho(a, b), a, b});
  std::sort(candidates.begin(), candidates.end(), [](const Link& x, const Link& y) {
    return std::tie(y.h, x.a, x.b) < std::tie(x.h, y.a, y.b);
  });

  // groups of clusters kept as ordered sequences; the leading member is the
  // group's highest peak
  std::vector<Index> group(static_cast<std::size_t>(k));
  std::iota(group.begin(), group.end(), Index{0});
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
  for (Index c = 0; c < k; ++c) members[static_cast<std::size_t>(c)] = {c};
  auto higher = [&](Index x, Index y) {
    const double hx = result.peak_log_rho[static_cast<std::size_t>(x)];
    const double hy = result.peak_log_rho[static_cast<std::size_t>(y)];
    if (hx != hy) return hx > hy;
    return result.centers[static_cast<std::size_t>(x)] < result.centers[static_cast<std::size_t>(y)];
  };
  for (const Link& link : candidates) {
    Index ga = group[static_cast<std::size_t>(link.a)];
    Index gb = group[static_cast<std::size_t>(link.b)];
    if (ga == gb) continue;
    auto& ma = members[static_cast<std::size_t>(ga)];
    auto& mb = members[static_cast<std::size_t>(gb)];
    if (higher(mb.front(), ma.front())) {
      std::swap(ga, gb);
    }
    auto& first = members[static_cast<std::size_t>(ga)];
    auto& second = members[static_cast<std::size_t>(gb)];
    for (Index c : second) group[static_cast<std::size_t>(c)] = ga;
    first.insert(first.end(), second.begin(), second.end());
    second.clear();
    out.links.push_back({link.a, link.b, link.h});
  }
  for (Index c = 0; c < k; ++c) {
    const auto& m = members[static_cast<std::size_t>(c)];
    out.order.insert(out.order.end(), m.begin(), m.end());
  }

  const auto pops = result.populations();
  const double total = static_cast<double>(std::accumulate(pops.begin(), pops.end(), Index{0}));
  out.x.assign(static_cast<std::size_t>(k), 0.0);
  out.width.assign(static_cast<std::size_t>(k), 0.0);
  double cursor = 0.0;
  for (Index c : out.order) {
    const double w = static_cast<double>(pops[static_cast<std::size_t>(c)]) / total;
    out.width[static_cast<std::size_t>(c)] = w;
    out.x[static_cast<std::size_t>(c)] = cursor + 0.5 * w;
    cursor += w;
  }
  return out;
}

}  // namespace manifold
