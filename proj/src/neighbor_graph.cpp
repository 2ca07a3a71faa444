#include "manifold/neighbor_graph.hpp"

#include "manifold/error.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <vector>

namespace manifold {

Metric Metric::minkowski(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError(fmt::format("minkowski exponent must be positive, got {}", p));
  if (p == 2.0) return euclidean();
  return Metric(Kind::minkowski, p);
}

Metric Metric::parse(std::string_view name) {
  if (name == "euclidean") return euclidean();
  if (name == "precomputed") return precomputed();
  constexpr std::string_view prefix = "minkowski:";
  if (name.starts_with(prefix)) {
    const std::string rest(name.substr(prefix.size()));
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == rest.size() && used > 0) return minkowski(p);
  }
  throw InputError(fmt::format("unknown metric '{}' (expected euclidean, minkowski:<p> or precomputed)", name));
}

std::string Metric::name() const {
  switch (kind_) {
    case Kind::euclidean:
      return "euclidean";
    case Kind::minkowski:
      return fmt::format("minkowski:{}", p_);
    case Kind::precomputed:
      return "precomputed";
  }
  return "euclidean";
}

NeighborGraph::NeighborGraph(IndexMatrix indices, DistanceMatrix distances, Metric metric, Source source)
    : indices_(std::move(indices)), distances_(std::move(distances)), metric_(metric), source_(source) {
  const Index n = indices_.rows();
  const Index k = indices_.cols();
  if (distances_.rows() != n || distances_.cols() != k)
    throw InputError("neighbor index and distance matrices differ in shape");
  if (n < 2) throw InputError("a neighbor graph needs at least 2 points");
  if (k < 1 || k > n - 1) throw InputError(fmt::format("maxk={} outside [1, N-1] for N={}", k, n));
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < k; ++r) {
      const Index j = indices_(i, r);
      const double d = distances_(i, r);
      if (j < 0 || j >= n) throw InputError(fmt::format("row {}: neighbor index {} out of range", i, j));
      if (j == i) throw InputError(fmt::format("row {}: point listed as its own neighbor", i));
      if (!std::isfinite(d) || d < 0.0) throw InputError(fmt::format("row {}: invalid distance {}", i, d));
      if (r > 0) {
        const double prev = distances_(i, r - 1);
        if (d < prev || (d == prev && j < indices_(i, r - 1)))
          throw InputError(fmt::format("row {}: neighbors not sorted at rank {}", i, r + 1));
      }
    }
  }
}

NeighborGraph NeighborGraph::truncated(Index maxk) const {
  if (maxk < 1 || maxk > this->maxk()) throw PreconditionError(fmt::format("cannot truncate maxk={} to {}", this->maxk(), maxk));
  return NeighborGraph(indices_.leftCols(maxk), distances_.leftCols(maxk), metric_, source_);
}

void save_neighbor_graph(const NeighborGraph& graph, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("NNGRAPH v1 N={} maxk={} metric={}\n", graph.n_points(), graph.maxk(), graph.metric().name());
  for (Index i = 0; i < graph.n_points(); ++i)
    for (Index r = 0; r < graph.maxk(); ++r)
      out.print("{} {} {} {:.17g}\n", i, graph.neighbor(i, r), r + 1, graph.distance(i, r));
}

namespace {

constexpr std::string_view kGraphMagic = "NNGRAPH v1";

template <typename T>
bool parse_field(std::string_view& line, T& value) {
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
  const auto* end = line.data() + line.size();
  const auto [ptr, ec] = std::from_chars(line.data(), end, value);
  if (ec != std::errc() || (ptr != end && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')) return false;
  line.remove_prefix(static_cast<std::size_t>(ptr - line.data()));
  return true;
}

bool only_space(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string_view header_value(std::string_view header, std::string_view key) {
  const std::string token = std::string(" ") + std::string(key) + "=";
  const auto pos = header.find(token);
  if (pos == std::string_view::npos) return {};
  auto rest = header.substr(pos + token.size());
  return rest.substr(0, std::min(rest.find_first_of(" \t\r"), rest.size()));
}

}  // namespace

bool is_neighbor_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string first;
  return in && std::getline(in, first) && std::string_view(first).starts_with(kGraphMagic);
}

NeighborGraph load_neighbor_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open graph file '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || !std::string_view(line).starts_with(kGraphMagic))
    throw ParseError(fmt::format("{}: line 1: missing '{}' header", path.string(), kGraphMagic), 1);

  Index n = 0;
  Index maxk = 0;
  {
    auto nv = header_value(line, "N");
    auto kv = header_value(line, "maxk");
    if (!parse_field(nv, n) || !parse_field(kv, maxk) || n < 2 || maxk < 1 || maxk > n - 1)
      throw ParseError(fmt::format("{}: line 1: invalid N/maxk in header", path.string()), 1);
  }
  const auto metric_name = header_value(line, "metric");
  const Metric metric = metric_name.empty() ? Metric::precomputed() : Metric::parse(metric_name);

  IndexMatrix idx = IndexMatrix::Constant(n, maxk, -1);
  DistanceMatrix dist(n, maxk);
  long line_no = 1;
  Index filled = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    if (only_space(rest)) continue;
    Index i = 0, j = 0, rank = 0;
    double d = 0.0;
    if (!parse_field(rest, i) || !parse_field(rest, j) || !parse_field(rest, rank) || !parse_field(rest, d) ||
        !only_space(rest))
      throw ParseError(fmt::format("{}: line {}: expected '<i> <j> <rank> <distance>'", path.string(), line_no), line_no);
    if (i < 0 || i >= n || j < 0 || j >= n || i == j)
      throw ParseError(fmt::format("{}: line {}: point index out of range", path.string(), line_no), line_no);
    if (rank < 1 || rank > maxk)
      throw ParseError(fmt::format("{}: line {}: rank {} outside [1, {}]", path.string(), line_no, rank, maxk), line_no);
    if (!std::isfinite(d) || d < 0.0)
      throw ParseError(fmt::format("{}: line {}: negative or non-finite distance", path.string(), line_no), line_no);
    if (d == 0.0)
      throw ParseError(fmt::format("{}: line {}: zero distance (duplicate points)", path.string(), line_no), line_no);
    if (idx(i, rank - 1) != -1)
      throw ParseError(fmt::format("{}: line {}: rank {} of point {} given twice", path.string(), line_no, rank, i), line_no);
    idx(i, rank - 1) = j;
    dist(i, rank - 1) = d;
    ++filled;
  }
  if (filled != n * maxk) {
    for (Index i = 0; i < n; ++i)
      for (Index r = 0; r < maxk; ++r)
        if (idx(i, r) == -1)
          throw InputError(fmt::format("{}: point {} is missing rank {}", path.string(), i, r + 1));
  }

  std::vector<std::pair<double, Index>> row(static_cast<std::size_t>(maxk));
  std::vector<Index> seen(row.size());
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < maxk; ++r) row[static_cast<std::size_t>(r)] = {dist(i, r), idx(i, r)};
    std::sort(row.begin(), row.end());
    for (Index r = 0; r < maxk; ++r) {
      dist(i, r) = row[static_cast<std::size_t>(r)].first;
      idx(i, r) = row[static_cast<std::size_t>(r)].second;
      seen[static_cast<std::size_t>(r)] = idx(i, r);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw InputError(fmt::format("{}: point {} lists the same neighbor twice", path.string(), i));
  }
  return NeighborGraph(std::move(idx), std::move(dist), metric, NeighborGraph::Source::external);
}

}  // namespace manifold
