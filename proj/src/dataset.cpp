#include "manifold/dataset.hpp"

#include "manifold/error.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

namespace manifold {

Dataset Dataset::from_points(PointMatrix points) {
  std::vector<Index> ids(static_cast<std::size_t>(points.rows()));
  std::iota(ids.begin(), ids.end(), Index{0});
  return from_points(std::move(points), std::move(ids));
}

Dataset Dataset::from_points(PointMatrix points, std::vector<Index> point_ids) {
  if (points.rows() < 1) throw InputError("dataset has no points");
  if (static_cast<Index>(point_ids.size()) != points.rows())
    throw PreconditionError("point_ids length differs from the number of rows");
  Dataset ds;
  ds.points_ = std::move(points);
  ds.point_ids_ = std::move(point_ids);
  return ds;
}

Dataset Dataset::from_distances(NeighborGraph graph) {
  Dataset ds;
  ds.point_ids_.resize(static_cast<std::size_t>(graph.n_points()));
  std::iota(ds.point_ids_.begin(), ds.point_ids_.end(), Index{0});
  ds.graph_ = std::make_shared<const NeighborGraph>(std::move(graph));
  return ds;
}

const PointMatrix& Dataset::points() const {
  if (!points_) throw PreconditionError("dataset was built from distances and has no coordinates");
  return *points_;
}

const NeighborGraph& Dataset::external_distances() const {
  if (!graph_) throw PreconditionError("dataset was built from coordinates, not distances");
  return *graph_;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.point_ids_ != b.point_ids_ || a.has_points() != b.has_points()) return false;
  if (a.has_points()) return *a.points_ == *b.points_;
  return *a.graph_ == *b.graph_;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_cell(std::string_view cell, double& value) {
  cell = trim(cell);
  if (cell.empty() || cell == "NA") {
    value = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset load_points(const std::filesystem::path& path, char delimiter, bool has_header) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open points file '{}'", path.string()));

  std::string line;
  if (has_header && !std::getline(in, line)) throw InputError(fmt::format("'{}' is empty", path.string()));

  std::vector<double> values;
  Index cols = -1;
  long row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::string_view rest(line);
    Index col = 0;
    while (true) {
      const auto cut = rest.find(delimiter);
      double v = 0.0;
      if (!parse_cell(rest.substr(0, cut), v))
        throw ParseError(fmt::format("{}: row {}, column {}: '{}' is not a number", path.string(), row, col,
                                     trim(rest.substr(0, cut))),
                         row, static_cast<long>(col));
      values.push_back(v);
      ++col;
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
    if (cols == -1) cols = col;
    if (col != cols)
      throw ParseError(fmt::format("{}: row {} has {} columns, expected {}", path.string(), row, col, cols), row);
    ++row;
  }
  if (row == 0) throw InputError(fmt::format("'{}' contains no data rows", path.string()));

  PointMatrix points = Eigen::Map<const PointMatrix>(values.data(), row, cols);
  return Dataset::from_points(std::move(points));
}

void save_points(const Dataset& ds, const std::filesystem::path& path, char delimiter) {
  const auto& pts = ds.points();
  auto out = fmt::output_file(path.string());
  for (Index i = 0; i < pts.rows(); ++i) {
    for (Index k = 0; k < pts.cols(); ++k) {
      if (k) out.print("{}", delimiter);
      out.print("{:.17g}", pts(i, k));
    }
    out.print("\n");
  }
}

std::pair<Dataset, CleaningReport> clean(const Dataset& ds, bool drop_duplicates) {
  CleaningReport report;
  report.n_before = ds.n_points();
  if (!ds.has_points()) {
    report.n_after = ds.n_points();
    return {ds, report};
  }
  const auto& pts = ds.points();

  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(pts.rows()));
  for (Index i = 0; i < pts.rows(); ++i) {
    if (pts.row(i).allFinite())
      keep.push_back(i);
    else
      ++report.nonfinite;
  }

  if (drop_duplicates && keep.size() > 1) {
    std::vector<Index> order = keep;
    auto row_less = [&](Index a, Index b) {
      for (Index k = 0; k < pts.cols(); ++k)
        if (pts(a, k) != pts(b, k)) return pts(a, k) < pts(b, k);
      return false;
    };
    std::stable_sort(order.begin(), order.end(), row_less);
    std::vector<char> drop(static_cast<std::size_t>(pts.rows()), 0);
    for (std::size_t s = 1; s < order.size(); ++s) {
      // stable sort keeps the lowest index first within a group of equal rows
      if (!row_less(order[s - 1], order[s])) drop[static_cast<std::size_t>(order[s])] = 1;
    }
    std::erase_if(keep, [&](Index i) { return drop[static_cast<std::size_t>(i)] != 0; });
    report.duplicates = static_cast<Index>(order.size() - keep.size());
  }

  report.n_after = static_cast<Index>(keep.size());
  if (keep.empty()) throw InputError("cleaning removed every row");
  if (report.empty()) return {ds, report};

  PointMatrix out(static_cast<Index>(keep.size()), pts.cols());
  std::vector<Index> ids(keep.size());
  for (std::size_t s = 0; s < keep.size(); ++s) {
    out.row(static_cast<Index>(s)) = pts.row(keep[s]);
    ids[s] = ds.point_ids()[static_cast<std::size_t>(keep[s])];
  }
  return {Dataset::from_points(std::move(out), std::move(ids)), report};
}

}  // namespace manifold
