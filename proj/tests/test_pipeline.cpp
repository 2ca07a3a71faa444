#include "manifold/dataset.hpp"
#include "manifold/density.hpp"
#include "manifold/error.hpp"
#include "manifold/neighbors.hpp"
#include "manifold/pipeline.hpp"
#include "manifold/results_io.hpp"
#include "manifold/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fmt/format.h>
#include <sys/wait.h>

#include <cstdlib>

using namespace manifold;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

const char* kBundleFiles[] = {"graph.nn", "id.json", "density.csv", "clusters.json", "dendrogram.json"};

/// Manifest without the wall-clock section.
json stable_manifest(const fs::path& dir) {
  json m = json::parse(oracle::read_file(dir / "manifest.json"));
  m.erase("runtime");
  return m;
}

void check_same_bundle(const fs::path& a, const fs::path& b) {
  for (const char* name : kBundleFiles) {
    CAPTURE(name);
    CHECK(oracle::read_file(a / name) == oracle::read_file(b / name));
  }
  CHECK(stable_manifest(a) == stable_manifest(b));
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

/// Runs the command-line tool inside `dir`, capturing both streams.
Run cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = fmt::format("cd '{}' && '{}' {} > stdout.txt 2> stderr.txt", dir.string(), MANIFOLD_CLI, args);
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, oracle::read_file(dir / "stdout.txt"),
          oracle::read_file(dir / "stderr.txt")};
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("three-point bundle") {
  const fs::path dir = oracle::scratch_dir("bundle3");
  write(dir / "line.csv", "0\n1\n3\n");
  PipelineOptions opts;
  opts.input = dir / "line.csv";
  opts.maxk = 2;
  const PipelineReport report = run_pipeline(opts, dir / "out");
  CHECK(report.n_points == 3);
  CHECK(report.n_clusters >= 1);
  CHECK(oracle::read_file(dir / "out" / "graph.nn") ==
        "NNGRAPH v1 N=3 maxk=2 metric=euclidean\n"
        "0 1 1 1\n0 2 2 3\n1 0 1 1\n1 2 2 2\n2 1 1 2\n2 0 2 3\n");
  for (const char* name : kBundleFiles) CHECK(fs::exists(dir / "out" / name));
  CHECK_FALSE(fs::exists(dir / "out.partial"));

  const json m = json::parse(oracle::read_file(dir / "out" / "manifest.json"));
  CHECK(m["manifest_version"] == 1);
  CHECK(m["tool_version"] == kToolVersion);
  CHECK(m["flags"]["maxk"] == 2);
  CHECK(m["inputs"][0]["sha256"] == sha256_file(dir / "line.csv"));
  CHECK(m["warnings"].size() == 1);
  CHECK(m["runtime"]["seconds"].contains("density"));

  const DensityTable table = read_density_csv(dir / "out" / "density.csv");
  CHECK(table.point_ids == std::vector<Index>{0, 1, 2});
  CHECK(table.density.k_used == std::vector<Index>{2, 2, 2});
}

TEST_CASE("reruns give byte-identical bundles") {
  const fs::path dir = oracle::scratch_dir("rerun");
  PipelineOptions opts;
  opts.demo = "gaussian-mix";
  opts.demo_points = 3000;
  opts.seed = 4;
  opts.id_method = IdMethod::gride;
  run_pipeline(opts, dir / "a");
  run_pipeline(opts, dir / "b");
  check_same_bundle(dir / "a", dir / "b");
  // reruns into an existing bundle replace it
  run_pipeline(opts, dir / "a");
  check_same_bundle(dir / "a", dir / "b");
}

TEST_CASE("bundles do not depend on the worker count") {
  const fs::path dir = oracle::scratch_dir("workers");
  PipelineOptions opts;
  opts.demo = "spiral";
  opts.demo_points = 2000;
  opts.seed = 2;
  for (int workers : {1, 2, 8}) {
    opts.workers = workers;
    run_pipeline(opts, dir / std::to_string(workers));
  }
  check_same_bundle(dir / "1", dir / "2");
  check_same_bundle(dir / "1", dir / "8");
}

TEST_CASE("a failing stage leaves nothing behind") {
  const fs::path dir = oracle::scratch_dir("failing");
  // the middle point sees two neighbors at the same distance
  write(dir / "flat.csv", "-1\n0\n1\n");
  PipelineOptions opts;
  opts.input = dir / "flat.csv";
  opts.maxk = 2;
  try {
    run_pipeline(opts, dir / "out");
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).starts_with("stage id: "));
  }
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK_FALSE(fs::exists(dir / "out.partial"));

  opts.input = dir / "missing.csv";
  CHECK_THROWS_AS(run_pipeline(opts, dir / "out"), InputError);
  CHECK_FALSE(fs::exists(dir / "out.partial"));

  // a directory that is not a bundle is never overwritten
  fs::create_directories(dir / "precious");
  write(dir / "precious" / "notes.txt", "keep");
  write(dir / "ok.csv", "0\n1\n3\n");
  opts.input = dir / "ok.csv";
  CHECK_THROWS(run_pipeline(opts, dir / "precious"));
  CHECK(oracle::read_file(dir / "precious" / "notes.txt") == "keep");
}

TEST_CASE("bench reports rows and slopes per stage") {
  BenchOptions opts;
  opts.n_values = {500, 2000};
  opts.maxk = 20;
  const BenchReport r = bench(opts);
  for (const char* stage : {"neighbors", "id", "knn_density", "pak_density", "adp"}) {
    CAPTURE(stage);
    CHECK(std::count_if(r.rows.begin(), r.rows.end(), [&](const BenchRow& row) { return row.stage == stage; }) == 2);
    REQUIRE(r.slopes.count(stage) == 1);
    CHECK(std::isfinite(r.slopes.at(stage)));
  }
}

TEST_CASE("command line exit codes and streams") {
  const fs::path dir = oracle::scratch_dir("cli");
  write(dir / "line.csv", "0\n1\n3\n");
  write(dir / "flat.csv", "-1\n0\n1\n");
  write(dir / "bad.csv", "0\nabc\n");

  Run r = cli(dir, "neighbors -i line.csv --maxk 2 -o -");
  CHECK(r.code == 0);
  CHECK(r.out.starts_with("NNGRAPH v1 N=3 maxk=2 metric=euclidean\n"));
  CHECK(r.err.empty());

  r = cli(dir, "neighbors -i line.csv --maxk 2 -o graph.nn");
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(load_neighbor_graph(dir / "graph.nn") == compute_neighbors(load_points(dir / "line.csv"), 2));
  const json manifest = json::parse(oracle::read_file(dir / "graph.nn.manifest.json"));
  CHECK(manifest["subcommand"] == "neighbors");
  CHECK(manifest["flags"]["maxk"] == 2);

  r = cli(dir, "id --method twonn-mle -i graph.nn -o id.json");
  CHECK(r.code == 0);
  const json id = json::parse(oracle::read_file(dir / "id.json"));
  CHECK(id.dump().find("1.36535") != std::string::npos);

  r = cli(dir, "neighbors -i bad.csv --maxk 1 -o -");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  const json parse_error = json::parse(r.err);
  CHECK(parse_error["row"] == 1);
  CHECK(parse_error["column"] == 0);

  r = cli(dir, "id -i flat.csv -o -");
  CHECK(r.code == 3);
  CHECK(json::parse(r.err)["error"] == "numerical");

  r = cli(dir, "neighbors -i line.csv --maxk 5 -o -");
  CHECK(r.code == 4);
  CHECK(json::parse(r.err)["error"] == "precondition");

  CHECK(cli(dir, "neighbors -i nowhere.csv -o -").code == 2);
  CHECK(cli(dir, "no-such-command").code == 2);

  r = cli(dir, "--version");
  CHECK(r.code == 0);
  CHECK(r.out.find(kToolVersion) != std::string::npos);
}

TEST_CASE("command line stages chain like the pipeline") {
  const fs::path dir = oracle::scratch_dir("cli-chain");
  REQUIRE(cli(dir, "demo gaussian-mix --n 1500 --seed 3 -o points.csv").code == 0);
  REQUIRE(cli(dir, "neighbors -i points.csv --maxk 50 -o graph.nn").code == 0);
  REQUIRE(cli(dir, "id --method twonn-mle -i graph.nn -o id.json").code == 0);
  const Run density = cli(dir, "density --method pak -i graph.nn --id auto -o density.csv");
  REQUIRE(density.code == 0);
  REQUIRE(cli(dir, "cluster --method adp -i graph.nn --density density.csv --z 1.5 -o clusters.json").code == 0);
  const json clusters = json::parse(oracle::read_file(dir / "clusters.json"));
  CHECK(clusters["n_clusters"] == 2);
  CHECK(clusters["labels"].size() == 1500);
  CHECK(clusters["dendrogram"]["links"].size() == 1);

  REQUIRE(cli(dir, "pipeline -i points.csv --maxk 50 -o bundle").code == 0);
  CHECK(oracle::read_file(dir / "bundle" / "graph.nn") == oracle::read_file(dir / "graph.nn"));
  CHECK(oracle::read_file(dir / "bundle" / "density.csv") == oracle::read_file(dir / "density.csv"));
  CHECK(json::parse(oracle::read_file(dir / "bundle" / "clusters.json")) == clusters);

  REQUIRE(cli(dir, "compare imbalance -a graph.nn -b graph.nn -o -").code == 0);
  REQUIRE(cli(dir, "select-features -i points.csv --target-cols 0,1 --max-size 2 -o selection.json").code == 0);
  const json selection = json::parse(oracle::read_file(dir / "selection.json"));
  CHECK(selection["order"].size() == 2);
  CHECK(selection["curve"].size() == 2);
}

TEST_SUITE_END();
