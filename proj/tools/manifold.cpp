// Command-line front end: one subcommand per library operation plus the
// end-to-end pipeline and the scaling benchmark.

#include "manifold/clustering.hpp"
#include "manifold/dataset.hpp"
#include "manifold/density.hpp"
#include "manifold/error.hpp"
#include "manifold/id_estimation.hpp"
#include "manifold/metric_comparison.hpp"
#include "manifold/neighbors.hpp"
#include "manifold/parallel.hpp"
#include "manifold/pipeline.hpp"
#include "manifold/results_io.hpp"
#include "manifold/synthetic.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <system_error>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace manifold;

namespace {

struct Globals {
  int workers = 0;
  Seed seed = 0;
  bool verbose = false;
};

void log(const Globals& g, const std::string& message) {
  if (g.verbose) std::cerr << "manifold: " << message << "\n";
}

/// Collects what a run needs to be reproduced and writes it next to the
/// primary output as <output>.manifest.json.
class Manifest {
 public:
  Manifest(std::string subcommand, const Globals& g) : subcommand_(std::move(subcommand)), globals_(g) {}

  void flag(const std::string& name, json value) { flags_[name] = std::move(value); }
  void input(const fs::path& path) { inputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}}); }
  void warn(const std::string& w) {
    std::cerr << "manifold: warning: " << w << "\n";
    warnings_.push_back(w);
  }

  template <typename F>
  auto timed(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto result = f();
    seconds_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

  void write(const fs::path& output) const {
    if (output.empty() || output == "-") return;
    json doc = {{"manifest_version", 1},
                {"tool_version", kToolVersion},
                {"subcommand", subcommand_},
                {"flags", flags_},
                {"inputs", inputs_},
                {"seed", globals_.seed},
                {"warnings", warnings_},
                {"runtime", {{"workers", resolve_workers(globals_.workers)}, {"seconds", seconds_}}}};
    write_text(doc.dump(2) + "\n", fs::path(output.string() + ".manifest.json"));
  }

 private:
  std::string subcommand_;
  const Globals& globals_;
  json flags_ = json::object();
  json inputs_ = json::array();
  json seconds_ = json::object();
  std::vector<std::string> warnings_;
};

char delimiter_char(const std::string& s) {
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() != 1) throw InputError(fmt::format("delimiter must be one character, got '{}'", s));
  return s[0];
}

/// Loads points and applies the default cleaning, reporting dropped rows.
Dataset load_clean(const fs::path& path, char delimiter, bool header, bool keep_duplicates, Manifest& m) {
  m.input(path);
  auto [ds, report] = clean(load_points(path, delimiter, header), !keep_duplicates);
  if (!report.empty())
    m.warn(fmt::format("cleaning dropped {} non-finite and {} duplicate rows ({} -> {} points)", report.nonfinite,
                       report.duplicates, report.n_before, report.n_after));
  return ds;
}

NeighborGraph load_graph(const fs::path& path, Manifest& m) {
  m.input(path);
  return load_neighbor_graph(path);
}

fs::path stream_path(const fs::path& p) { return p == "-" ? fs::path("/dev/stdout") : p; }

int fail(int code, const char* kind, const std::string& message, std::optional<std::pair<long, long>> where = {}) {
  json err = {{"error", kind}, {"message", message}, {"exit_code", code}};
  if (where) {
    err["row"] = where->first;
    err["column"] = where->second;
  }
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-based analysis of data manifolds: intrinsic dimension, density, clustering, metric comparison"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  Globals g;
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_flag("--verbose,-v", g.verbose, "Log progress to stderr");

  // neighbors
  struct {
    fs::path input, output = "-";
    std::optional<Index> maxk;
    std::string metric = "euclidean", delimiter = ",";
    bool header = false, keep_duplicates = false;
    fs::path cleaning_report;
  } nb;
  auto* neighbors = app.add_subcommand("neighbors", "Build the k-nearest-neighbor graph");
  neighbors->add_option("-i,--input", nb.input, "Points file")->required()->check(CLI::ExistingFile);
  neighbors->add_option("--maxk", nb.maxk, "Neighbors per point (default min(100, N-1))");
  neighbors->add_option("--metric", nb.metric, "euclidean or minkowski:<p>");
  neighbors->add_option("--delimiter", nb.delimiter);
  neighbors->add_flag("--header", nb.header, "First line is a header");
  neighbors->add_flag("--keep-duplicates", nb.keep_duplicates, "Do not drop duplicate points");
  neighbors->add_option("--cleaning-report", nb.cleaning_report, "Write the cleaning report JSON here");
  neighbors->add_option("-o,--output", nb.output, "Graph file ('-' for stdout)");

  // id
  struct {
    fs::path input, output = "-";
    std::string method = "twonn-mle", delimiter = ",";
    std::optional<Index> maxk;
    std::vector<double> fractions = {1.0, 0.5, 0.25, 0.125};
    std::vector<Index> n1 = {1, 2, 4, 8, 16};
    double discard = 0.1;
    Index repeats = 10;
    bool header = false;
  } ido;
  auto* id = app.add_subcommand("id", "Estimate the intrinsic dimension");
  id->add_option("--method", ido.method)->check(CLI::IsMember({"twonn-mle", "twonn-fit", "gride", "decimation"}));
  id->add_option("-i,--input", ido.input, "Points file or graph file")->required()->check(CLI::ExistingFile);
  id->add_option("--maxk", ido.maxk, "Neighbors computed from points");
  id->add_option("--fractions", ido.fractions, "Decimation fractions")->delimiter(',');
  id->add_option("--n1", ido.n1, "Gride n1 values")->delimiter(',');
  id->add_option("--discard", ido.discard, "Fraction of largest ratios dropped by twonn-fit");
  id->add_option("--repeats", ido.repeats, "Decimation repeats per fraction");
  id->add_option("--delimiter", ido.delimiter);
  id->add_flag("--header", ido.header);
  id->add_option("-o,--output", ido.output, "Result JSON ('-' for stdout)");

  // density
  struct {
    fs::path input, output = "-";
    std::string method = "pak", id = "auto";
    Index k = 30;
    double dthr = 23.928;
  } dso;
  auto* density = app.add_subcommand("density", "Estimate per-point log-density");
  density->add_option("--method", dso.method)->check(CLI::IsMember({"knn", "pak"}));
  density->add_option("-i,--input", dso.input, "Graph file")->required()->check(CLI::ExistingFile);
  density->add_option("--id", dso.id, "Intrinsic dimension, or 'auto' for the 2NN estimate");
  density->add_option("--k", dso.k, "Neighbors for the kNN estimator");
  density->add_option("--dthr", dso.dthr, "PAk likelihood-ratio threshold");
  density->add_option("-o,--output", dso.output, "Density CSV ('-' for stdout)");

  // cluster
  struct {
    fs::path input, density, points, decision, output = "-";
    std::string method = "adp", delimiter = ",";
    double z = kDefaultZ;
    std::vector<Index> centers;
    bool header = false;
  } clo;
  auto* cluster = app.add_subcommand("cluster", "Density-peak clustering");
  cluster->add_option("--method", clo.method)->check(CLI::IsMember({"dp", "adp"}));
  cluster->add_option("-i,--input", clo.input, "Graph file")->required()->check(CLI::ExistingFile);
  cluster->add_option("--density", clo.density, "Density CSV")->required()->check(CLI::ExistingFile);
  cluster->add_option("--z", clo.z, "ADP significance threshold")->check(CLI::PositiveNumber);
  cluster->add_option("--centers", clo.centers, "DP centers (point indices)")->delimiter(',');
  cluster->add_option("--points", clo.points, "Points file for the exact nearest-denser search")
      ->check(CLI::ExistingFile);
  cluster->add_option("--delimiter", clo.delimiter);
  cluster->add_flag("--header", clo.header);
  cluster->add_option("--decision-graph", clo.decision, "Write the decision graph CSV here");
  cluster->add_option("-o,--output", clo.output, "Clusters JSON ('-' for stdout)");

  // compare
  struct {
    std::string mode;
    fs::path a, b, output = "-";
    Index k = 30;
  } cmo;
  auto* compare = app.add_subcommand("compare", "Compare two metrics on the same points");
  compare->add_option("mode", cmo.mode, "overlap or imbalance")->required()->check(CLI::IsMember({"overlap", "imbalance"}));
  compare->add_option("-a", cmo.a, "Graph file for metric a")->required()->check(CLI::ExistingFile);
  compare->add_option("-b", cmo.b, "Graph file for metric b")->required()->check(CLI::ExistingFile);
  compare->add_option("--k", cmo.k, "Neighborhood size for the overlap");
  compare->add_option("-o,--output", cmo.output, "Result JSON ('-' for stdout)");

  // select-features
  struct {
    fs::path input, output = "-";
    std::vector<Index> target;
    Index max_size = 10, sample = 2000;
    std::string delimiter = ",";
    bool header = false;
  } sfo;
  auto* select = app.add_subcommand("select-features", "Greedy feature selection by information imbalance");
  select->add_option("-i,--input", sfo.input, "Points file")->required()->check(CLI::ExistingFile);
  select->add_option("--target-cols", sfo.target, "Columns defining the target metric (default all)")->delimiter(',');
  select->add_option("--max-size", sfo.max_size, "Largest subset size");
  select->add_option("--sample", sfo.sample, "Evaluation subsample size");
  select->add_option("--delimiter", sfo.delimiter);
  select->add_flag("--header", sfo.header);
  select->add_option("-o,--output", sfo.output, "Selection JSON ('-' for stdout)");

  // pipeline
  PipelineOptions po;
  std::string po_id = "twonn-mle", po_density = "pak", po_cluster = "adp", po_delim = ",";
  std::optional<Index> po_maxk;
  fs::path po_out;
  auto* pipeline = app.add_subcommand("pipeline", "neighbors -> id -> density -> clustering into a bundle directory");
  pipeline->footer("Stage flags mean the same as in neighbors, id, density and cluster.");
  auto* p_in = pipeline->add_option("-i,--input", po.input, "Points file")->check(CLI::ExistingFile);
  auto* p_demo = pipeline->add_option("--demo", po.demo, "Built-in data: uniform-<d>, gaussian-mix, spiral, mobius");
  p_in->excludes(p_demo);
  pipeline->add_option("--n", po.demo_points, "Points generated for --demo");
  pipeline->add_option("--maxk", po_maxk);
  pipeline->add_option("--metric", po.metric);
  pipeline->add_option("--id-method", po_id)->check(CLI::IsMember({"twonn-mle", "twonn-fit", "gride", "decimation"}));
  pipeline->add_option("--fractions", po.fractions)->delimiter(',');
  pipeline->add_option("--n1", po.n1_values)->delimiter(',');
  pipeline->add_option("--discard", po.discard);
  pipeline->add_option("--repeats", po.repeats);
  pipeline->add_option("--density-method", po_density)->check(CLI::IsMember({"knn", "pak"}));
  pipeline->add_option("--k", po.knn_k);
  pipeline->add_option("--dthr", po.d_threshold);
  pipeline->add_option("--cluster-method", po_cluster)->check(CLI::IsMember({"dp", "adp"}));
  pipeline->add_option("--z", po.z)->check(CLI::PositiveNumber);
  pipeline->add_option("--centers", po.centers)->delimiter(',');
  pipeline->add_option("--delimiter", po_delim);
  pipeline->add_flag("--header", po.has_header);
  pipeline->add_option("-o,--output", po_out, "Bundle directory")->required();

  // bench
  BenchOptions bo;
  fs::path bench_out = "-";
  bool bench_no_adp = false;
  auto* benchmark = app.add_subcommand("bench", "Per-stage wall time on uniform 2D data");
  benchmark->add_option("--n", bo.n_values, "Dataset sizes, ascending")->delimiter(',');
  benchmark->add_option("--maxk", bo.maxk);
  benchmark->add_option("--repeats", bo.repeats, "Timing is the minimum over repeats");
  benchmark->add_flag("--no-adp", bench_no_adp, "Skip the clustering stage");
  benchmark->add_option("-o,--output", bench_out, "Report JSON ('-' for stdout)");

  // demo
  std::string demo_name;
  Index demo_n = 10000;
  fs::path demo_out = "-", demo_labels;
  auto* demo = app.add_subcommand("demo", "Write a built-in synthetic dataset as CSV");
  demo->add_option("name", demo_name, "uniform-<d>, gaussian-mix, spiral, mobius")->required();
  demo->add_option("--n", demo_n, "Number of points");
  demo->add_option("--labels", demo_labels, "Write generating labels here");
  demo->add_option("-o,--output", demo_out, "Points CSV ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  }

  try {
    if (*neighbors) {
      Manifest m("neighbors", g);
      m.flag("maxk", nb.maxk ? json(*nb.maxk) : json("default"));
      m.flag("metric", nb.metric);
      m.flag("delimiter", nb.delimiter);
      m.flag("header", nb.header);
      m.flag("keep_duplicates", nb.keep_duplicates);
      const Metric metric = Metric::parse(nb.metric);
      m.input(nb.input);
      auto [ds, report] = clean(load_points(nb.input, delimiter_char(nb.delimiter), nb.header), !nb.keep_duplicates);
      if (!report.empty())
        m.warn(fmt::format("cleaning dropped {} non-finite and {} duplicate rows", report.nonfinite, report.duplicates));
      if (!nb.cleaning_report.empty()) write_cleaning_report_json(report, nb.cleaning_report);
      const Index maxk = nb.maxk.value_or(default_maxk(ds.n_points()));
      const auto graph = m.timed("neighbors", [&] { return compute_neighbors(ds, maxk, {metric, 30, g.workers}); });
      log(g, fmt::format("{} points, maxk={}", graph.n_points(), graph.maxk()));
      save_neighbor_graph(graph, stream_path(nb.output));
      m.write(nb.output);
    } else if (*id) {
      Manifest m("id", g);
      const IdMethod method = parse_id_method(ido.method);
      m.flag("method", ido.method);
      m.flag("maxk", ido.maxk ? json(*ido.maxk) : json("default"));
      m.flag("fractions", ido.fractions);
      m.flag("n1", ido.n1);
      m.flag("discard", ido.discard);
      m.flag("repeats", ido.repeats);
      const bool is_graph = is_neighbor_graph_file(ido.input);
      std::optional<Dataset> ds;
      NeighborGraph graph;
      if (is_graph) {
        graph = load_graph(ido.input, m);
        if (method == IdMethod::decimation) throw PreconditionError("decimation needs a points file, not a graph");
      } else {
        ds = load_clean(ido.input, delimiter_char(ido.delimiter), ido.header, false, m);
        if (method != IdMethod::decimation) {
          Index maxk = ido.maxk.value_or(2);
          if (method == IdMethod::gride && !ido.maxk)
            maxk = 2 * *std::max_element(ido.n1.begin(), ido.n1.end());
          maxk = std::min(maxk, ds->n_points() - 1);
          graph = m.timed("neighbors", [&] { return compute_neighbors(*ds, maxk, {Metric::euclidean(), 30, g.workers}); });
        }
      }
      const IdScan scan = m.timed("id", [&]() -> IdScan {
        switch (method) {
          case IdMethod::twonn_mle:
            return {{id_2nn_mle(compute_mu(graph))}};
          case IdMethod::twonn_fit:
            return {{id_2nn_fit(compute_mu(graph), ido.discard)}};
          case IdMethod::gride:
            return id_gride(graph, ido.n1);
          case IdMethod::decimation:
            return id_decimation(*ds, ido.fractions, {ido.repeats, g.seed, {Metric::euclidean(), 30, g.workers}});
        }
        return {};
      });
      write_id_json(scan, method, ido.output);
      m.write(ido.output);
    } else if (*density) {
      Manifest m("density", g);
      m.flag("method", dso.method);
      m.flag("id", dso.id);
      m.flag("k", dso.k);
      m.flag("dthr", dso.dthr);
      const NeighborGraph graph = load_graph(dso.input, m);
      double id_value = 0.0;
      if (dso.id == "auto") {
        id_value = id_2nn_mle(compute_mu(graph)).id;
        std::cerr << fmt::format("manifold: --id auto: using 2NN estimate {:.6g}\n", id_value);
        m.flag("id_resolved", id_value);
      } else {
        try {
          id_value = std::stod(dso.id);
        } catch (const std::exception&) {
          throw InputError(fmt::format("--id must be a number or 'auto', got '{}'", dso.id));
        }
      }
      const DensityField field = m.timed("density", [&] {
        if (parse_density_method(dso.method) == DensityMethod::pak)
          return pak_density(graph, id_value, {dso.dthr, PakOptions{}.k_min, g.workers});
        return knn_density(graph, dso.k, id_value, g.workers);
      });
      std::vector<Index> ids(static_cast<std::size_t>(graph.n_points()));
      std::iota(ids.begin(), ids.end(), Index{0});
      write_density_csv(field, ids, dso.output);
      m.write(dso.output);
    } else if (*cluster) {
      Manifest m("cluster", g);
      m.flag("method", clo.method);
      m.flag("z", clo.z);
      m.flag("centers", clo.centers);
      const NeighborGraph graph = load_graph(clo.input, m);
      m.input(clo.density);
      DensityTable table = read_density_csv(clo.density);
      if (table.density.size() != graph.n_points())
        throw InputError(fmt::format("density has {} rows, graph has {} points", table.density.size(), graph.n_points()));
      std::optional<Dataset> pts;
      if (!clo.points.empty()) {
        pts = load_clean(clo.points, delimiter_char(clo.delimiter), clo.header, false, m);
        if (pts->n_points() != graph.n_points()) throw InputError("points file and graph differ in size");
      }
      const ClusterResult result = m.timed("cluster", [&] {
        if (clo.method == "adp") return adp_cluster(table.density, graph, clo.z);
        if (clo.centers.empty()) throw PreconditionError("dp clustering needs --centers");
        const DecisionGraph dg = decision_graph(table.density, graph, pts ? &pts->points() : nullptr);
        ClusterResult r = dp_cluster(dg, clo.centers);
        attach_saddles(r, table.density, graph);
        return r;
      });
      for (const auto& w : result.warnings) m.warn(w);
      if (!clo.decision.empty())
        write_decision_graph_csv(decision_graph(table.density, graph, pts ? &pts->points() : nullptr),
                                 table.point_ids, clo.decision);
      write_clusters_json(result, dendrogram(result), clo.output);
      m.write(clo.output);
    } else if (*compare) {
      Manifest m("compare", g);
      m.flag("mode", cmo.mode);
      m.flag("k", cmo.k);
      const NeighborGraph a = load_graph(cmo.a, m);
      const NeighborGraph b = load_graph(cmo.b, m);
      if (cmo.mode == "overlap") {
        const double chi = m.timed("compare", [&] { return neighborhood_overlap(a, b, cmo.k); });
        write_overlap_json(chi, cmo.k, a.n_points(), cmo.output);
      } else {
        const auto r = m.timed("compare", [&] {
          return information_imbalance(RankTable::from_graph(a), RankTable::from_graph(b));
        });
        if (r.truncated_ab + r.truncated_ba > 0)
          m.warn(fmt::format("{} + {} conditional ranks fell beyond maxk and were counted as maxk + 1",
                             r.truncated_ab, r.truncated_ba));
        write_imbalance_json(r, cmo.output);
      }
      m.write(cmo.output);
    } else if (*select) {
      Manifest m("select-features", g);
      m.flag("target_cols", sfo.target);
      m.flag("max_size", sfo.max_size);
      m.flag("sample", sfo.sample);
      const Dataset ds = load_clean(sfo.input, delimiter_char(sfo.delimiter), sfo.header, false, m);
      std::vector<Index> target = sfo.target;
      if (target.empty())
        for (Index c = 0; c < ds.n_features(); ++c) target.push_back(c);
      const auto sel = m.timed("select", [&] {
        return greedy_feature_selection(ds.points(), target, {sfo.max_size, sfo.sample, g.seed, g.workers});
      });
      write_selection_json(sel, sfo.output);
      m.write(sfo.output);
    } else if (*pipeline) {
      if (!po.demo && po.input.empty()) throw InputError("pipeline needs --input or --demo");
      po.maxk = po_maxk;
      po.id_method = parse_id_method(po_id);
      po.density_method = parse_density_method(po_density);
      po.cluster_method = po_cluster == "adp" ? ClusterMethod::adp : ClusterMethod::dp;
      po.delimiter = delimiter_char(po_delim);
      po.seed = g.seed;
      po.workers = g.workers;
      const PipelineReport r = run_pipeline(po, po_out);
      for (const auto& w : r.warnings) std::cerr << "manifold: warning: " << w << "\n";
      log(g, fmt::format("{} points, id {:.4g}, {} clusters", r.n_points, r.id, r.n_clusters));
    } else if (*benchmark) {
      bo.seed = g.seed;
      bo.workers = g.workers;
      bo.include_adp = !bench_no_adp;
      const BenchReport r = bench(bo);
      json rows = json::array();
      for (const auto& row : r.rows) rows.push_back({{"stage", row.stage}, {"n", row.n}, {"seconds", row.seconds}});
      json slopes = json::object();
      for (const auto& [stage, s] : r.slopes) slopes[stage] = s;
      write_text(json{{"maxk", bo.maxk}, {"dims", 2}, {"rows", rows}, {"slopes", slopes}}.dump(2) + "\n", bench_out);
    } else if (*demo) {
      Manifest m("demo", g);
      m.flag("name", demo_name);
      m.flag("n", demo_n);
      const auto data = synthetic::demo(demo_name, demo_n, g.seed);
      const Dataset ds = Dataset::from_points(data.points);
      save_points(ds, stream_path(demo_out));
      if (!demo_labels.empty()) {
        std::string text;
        for (const Index l : data.labels) text += fmt::format("{}\n", l);
        write_text(text, demo_labels);
      }
      m.write(demo_out);
    }
  } catch (const ParseError& e) {
    return fail(2, "input", e.what(), std::pair{e.row(), e.column()});
  } catch (const InputError& e) {
    return fail(2, "input", e.what());
  } catch (const NumericalError& e) {
    return fail(3, "numerical", e.what());
  } catch (const PreconditionError& e) {
    return fail(4, "precondition", e.what());
  } catch (const Error& e) {
    return fail(3, "error", e.what());
  } catch (const std::system_error& e) {
    return fail(2, "input", e.what());
  }
  return 0;
}
