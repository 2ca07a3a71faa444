#include "manifold/results_io.hpp"

#include "manifold/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

namespace manifold {

using nlohmann::json;

namespace {

/// Non-finite reals become null.
json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <typename T>
json array(const std::vector<T>& values) {
  json out = json::array();
  for (const auto& v : values) {
    if constexpr (std::is_floating_point_v<T>)
      out.push_back(real(v));
    else
      out.push_back(v);
  }
  return out;
}

void write_json(const json& doc, const std::filesystem::path& path) { write_text(doc.dump(2) + "\n", path); }

json dendrogram_json(const Dendrogram& tree) {
  json links = json::array();
  for (const auto& l : tree.links) links.push_back({{"a", l.a}, {"b", l.b}, {"h", real(l.height)}});
  return {{"order", array(tree.order)},
          {"x", array(tree.x)},
          {"width", array(tree.width)},
          {"peak_h", array(tree.peak_height)},
          {"links", links}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(real(m(r, c)));
    out.push_back(row);
  }
  return out;
}

template <typename T>
T parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw ParseError(fmt::format("cannot parse '{}'", cell), static_cast<Index>(line), static_cast<Index>(column));
  return value;
}

}  // namespace

void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw InputError(fmt::format("write failed for {}", path.string()));
}

void write_id_json(const IdScan& scan, IdMethod method, const std::filesystem::path& path) {
  json estimates = json::array();
  for (const auto& e : scan.estimates)
    estimates.push_back({{"id", real(e.id)}, {"id_err", real(e.id_err)}, {"scale", real(e.scale)}, {"n_used", e.n_used}});
  write_json({{"method", std::string(to_string(method))}, {"estimates", estimates}}, path);
}

void write_density_csv(const DensityField& density, std::span<const Index> point_ids,
                       const std::filesystem::path& path) {
  if (static_cast<Index>(point_ids.size()) != density.size())
    throw PreconditionError("point_ids and density differ in length");
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "point_id,log_rho,log_rho_err,k_used\n");
  for (std::size_t i = 0; i < point_ids.size(); ++i)
    fmt::format_to(std::back_inserter(buf), "{},{:.17g},{:.17g},{}\n", point_ids[i], density.log_rho[i],
                   density.log_rho_err[i], density.k_used[i]);
  write_text(fmt::to_string(buf), path);
}

DensityTable read_density_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot read {}", path.string()));
  std::string line;
  if (!std::getline(in, line) || line.rfind("point_id,log_rho,log_rho_err,k_used", 0) != 0)
    throw InputError(fmt::format("{}: expected header point_id,log_rho,log_rho_err,k_used", path.string()));
  DensityTable table;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      cells.push_back(rest.substr(0, pos));
    cells.push_back(rest);
    if (cells.size() != 4)
      throw ParseError(fmt::format("expected 4 columns, found {}", cells.size()), static_cast<Index>(row),
                       static_cast<Index>(cells.size()));
    table.point_ids.push_back(parse_cell<Index>(cells[0], row, 0));
    table.density.log_rho.push_back(parse_cell<double>(cells[1], row, 1));
    table.density.log_rho_err.push_back(parse_cell<double>(cells[2], row, 2));
    table.density.k_used.push_back(parse_cell<Index>(cells[3], row, 3));
    ++row;
  }
  if (row == 0) throw InputError(fmt::format("{}: no density rows", path.string()));
  return table;
}

void write_clusters_json(const ClusterResult& result, const Dendrogram& tree, const std::filesystem::path& path) {
  json doc = {{"n_clusters", result.n_clusters()},
              {"labels", array(result.labels)},
              {"centers", array(result.centers)},
              {"populations", array(result.populations())},
              {"peak_log_rho", array(result.peak_log_rho)},
              {"peak_err", array(result.peak_err)},
              {"saddles", matrix_json(result.saddle_log_rho)},
              {"saddle_err", matrix_json(result.saddle_err)},
              {"z", result.z_used ? real(*result.z_used) : json(nullptr)},
              {"warnings", result.warnings},
              {"dendrogram", dendrogram_json(tree)}};
  write_json(doc, path);
}

void write_dendrogram_json(const Dendrogram& tree, const std::filesystem::path& path) {
  write_json(dendrogram_json(tree), path);
}

void write_decision_graph_csv(const DecisionGraph& dg, std::span<const Index> point_ids,
                              const std::filesystem::path& path) {
  if (static_cast<Index>(point_ids.size()) != dg.size())
    throw PreconditionError("point_ids and decision graph differ in length");
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "point_id,log_rho,delta\n");
  for (std::size_t i = 0; i < point_ids.size(); ++i)
    fmt::format_to(std::back_inserter(buf), "{},{:.17g},{:.17g}\n", point_ids[i], dg.log_rho[i], dg.delta[i]);
  write_text(fmt::to_string(buf), path);
}

void write_cleaning_report_json(const CleaningReport& report, const std::filesystem::path& path) {
  write_json({{"nonfinite", report.nonfinite},
              {"duplicates", report.duplicates},
              {"n_before", report.n_before},
              {"n_after", report.n_after}},
             path);
}

void write_selection_json(const FeatureSelection& selection, const std::filesystem::path& path) {
  json curve = json::array();
  for (const auto& s : selection.curve)
    curve.push_back({{"size", s.size},
                     {"feature", s.feature},
                     {"d_fwd", real(s.d_fwd)},
                     {"d_bwd", real(s.d_bwd)},
                     {"best_size", s.best_size},
                     {"d_fwd_prefix", real(s.d_fwd_prefix)},
                     {"d_bwd_prefix", real(s.d_bwd_prefix)}});
  write_json({{"search", "greedy-forward"}, {"order", array(selection.order)}, {"curve", curve}}, path);
}

void write_overlap_json(double overlap, Index k, Index n, const std::filesystem::path& path) {
  write_json({{"overlap", real(overlap)}, {"k", k}, {"n", n}}, path);
}

void write_imbalance_json(const ImbalanceResult& result, const std::filesystem::path& path) {
  write_json({{"delta_ab", real(result.delta_ab)},
              {"delta_ba", real(result.delta_ba)},
              {"n", result.n},
              {"truncated_ab", result.truncated_ab},
              {"truncated_ba", result.truncated_ba}},
             path);
}

}  // namespace manifold
