#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support.hpp"

#include "adasdbo/errors.hpp"
#include "adasdbo/experiment.hpp"
#include "adasdbo/metrics.hpp"

using namespace adasdbo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

const char* kMinimal = R"({ "problem": { "kind": "quadratic" } })";

}  // namespace

TEST_CASE("minimal config fills every default") {
  const ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.problem.kind == "quadratic");
  CHECK(cfg.topology.kind == "ring");
  CHECK(cfg.topology.n == 5);
  CHECK(cfg.algorithm.kind == "adasdbo");
  CHECK(cfg.algorithm.gamma_x == 1.0);
  CHECK(cfg.algorithm.gamma_y == 1.0);
  CHECK(cfg.algorithm.gamma_v == 1.0);
  CHECK(cfg.algorithm.m0 == 10.0);
  CHECK(cfg.algorithm.eta_x == 0.01);
  CHECK(cfg.algorithm.eta_y == 0.02);
  CHECK(cfg.algorithm.eta_v == 0.01);
  CHECK(cfg.algorithm.rounds == 1000);
  CHECK(cfg.oracle.inner_tol == 1e-9);
  CHECK(cfg.oracle.cg_tol == 1e-10);
  CHECK(!cfg.sweep.has_value());
}

TEST_CASE("config validation rejects bad documents") {
  CHECK_THROWS_AS(parse_config("not json"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "problem": { "kind": "nonsense" } })"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "algorithm": { "kind": "nonsense" } })"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "problem": { "mystery_key": 1 } })"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "algorithm": { "rounds": 0 } })"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "algorithm": { "projection_radius": -2 } })"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "sweep": { "parameter": "gamma", "values": [] } })"),
                  ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "sweep": { "parameter": "zeta", "values": [1] } })"),
                  ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "topology": { "kind": "torus" } })"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "oracle": { "stride": 0 } })"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({ "output": { "formats": ["yaml"] } })"), ParseError);
}

TEST_CASE("config hash ignores key order, comments and whitespace") {
  const char* a = R"({
    // a comment
    "topology": { "n": 5, "kind": "ring" },
    "problem": { "kind": "quadratic", "seed": 1 }
  })";
  const char* b = R"({"problem":{"seed":1,"kind":"quadratic"},"topology":{"kind":"ring","n":5}})";
  CHECK(config_hash(parse_config(a)) == config_hash(parse_config(b)));

  // A semantic change does alter the hash.
  const char* c = R"({"problem":{"seed":2,"kind":"quadratic"}})";
  CHECK(config_hash(parse_config(a)) != config_hash(parse_config(c)));
}

TEST_CASE("topology builder covers all kinds") {
  TopologySection ts;
  ts.kind = "ring";
  CHECK(build_topology(ts).size() == 5);
  ts.kind = "complete";
  CHECK(build_topology(ts).rho_w() == 0.0);
  ts.kind = "ladder";
  ts.n = 6;
  CHECK(build_topology(ts).size() == 6);
  ts.kind = "random";
  ts.n = 6;
  ts.edge_prob = 0.7;
  CHECK(build_topology(ts).size() == 6);
}

TEST_CASE("run_single writes the promised artifacts") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.algorithm.rounds = 5;
  const auto dir = testsupport::fresh_temp_dir("run-single");

  const RunSummary s = run_single(cfg, dir.string());
  CHECK(!s.diverged);
  CHECK(s.rounds_completed == 5);
  CHECK(s.config_hash == config_hash(cfg));
  CHECK(fs::exists(s.trace_path));
  CHECK(fs::file_size(s.trace_path) > 0);
  CHECK(fs::exists(s.summary_path));
  CHECK(fs::file_size(s.summary_path) > 0);
  CHECK(s.final_stationarity.has_value());
  CHECK(s.min_stationarity.has_value());

  const auto traces = read_trace_csv(s.trace_path);
  CHECK(traces.size() == 5);
  fs::remove_all(dir);
}

TEST_CASE("a single round emits exactly one record") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.algorithm.rounds = 1;
  const auto dir = testsupport::fresh_temp_dir("one-round");
  const RunSummary s = run_single(cfg, dir.string());
  CHECK(read_trace_csv(s.trace_path).size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("repeated runs are idempotent and bitwise identical") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.algorithm.rounds = 12;
  const auto dir = testsupport::fresh_temp_dir("idempotent");

  const RunSummary s1 = run_single(cfg, dir.string());
  const std::string first = slurp(s1.trace_path);
  const RunSummary s2 = run_single(cfg, dir.string());
  CHECK(s1.config_hash == s2.config_hash);
  CHECK(s1.trace_path == s2.trace_path);
  CHECK(first == slurp(s2.trace_path));
  fs::remove_all(dir);
}

TEST_CASE("thread count does not change any emitted byte") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.algorithm.rounds = 30;
  const auto dir1 = testsupport::fresh_temp_dir("threads-1");
  const auto dir8 = testsupport::fresh_temp_dir("threads-8");
  const RunSummary a = run_single(cfg, dir1.string(), 1);
  const RunSummary b = run_single(cfg, dir8.string(), 8);
  CHECK(slurp(a.trace_path) == slurp(b.trace_path));
  fs::remove_all(dir1);
  fs::remove_all(dir8);
}

TEST_CASE("divergence is a recorded outcome, not a crash") {
  ExperimentConfig cfg = parse_config(R"({
    "problem": { "kind": "quadratic" },
    "algorithm": { "kind": "const", "eta_x": 100, "eta_y": 100, "eta_v": 100, "rounds": 100 }
  })");
  const auto dir = testsupport::fresh_temp_dir("diverge");
  const RunSummary s = run_single(cfg, dir.string());
  CHECK(s.diverged);
  REQUIRE(s.divergence_round.has_value());
  CHECK(s.rounds_completed < 100);
  CHECK(fs::exists(s.trace_path));  // partial trace flushed
  const auto traces = read_trace_csv(s.trace_path);
  CHECK(traces.size() == s.rounds_completed);
  fs::remove_all(dir);
}

TEST_CASE("sweep produces one run per value plus a consolidated csv") {
  ExperimentConfig cfg = parse_config(R"({
    "problem": { "kind": "quadratic", "p": 2, "q": 2 },
    "algorithm": { "rounds": 5 },
    "sweep": { "parameter": "gamma", "values": [0.5, 1, 2] }
  })");
  const auto dir = testsupport::fresh_temp_dir("sweep");

  const auto summaries = run_sweep(cfg, dir.string(), /*threads=*/2);
  CHECK(summaries.size() == 3);
  for (const auto& s : summaries) {
    CHECK(s.rounds_completed == 5);
    CHECK(fs::exists(s.trace_path));
  }
  const std::string sweep_csv = slurp((fs::path(dir) / "sweep.csv").string());
  CHECK(sweep_csv.find("value,final_accuracy,final_stationarity,diverged") == 0);
  // Three data rows.
  std::size_t rows = 0;
  for (char c : sweep_csv)
    if (c == '\n') ++rows;
  CHECK(rows == 4);  // header + 3 values
  fs::remove_all(dir);
}

TEST_CASE("sweep over topologies applies the string values") {
  ExperimentConfig cfg = parse_config(R"({
    "problem": { "kind": "quadratic", "p": 2, "q": 2 },
    "topology": { "n": 6 },
    "algorithm": { "rounds": 3 },
    "sweep": { "parameter": "topology", "values": ["ring", "ladder", "complete"] }
  })");
  const auto dir = testsupport::fresh_temp_dir("topo-sweep");
  const auto summaries = run_sweep(cfg, dir.string());
  CHECK(summaries.size() == 3);
  for (const auto& s : summaries) CHECK(s.rounds_completed == 3);
  fs::remove_all(dir);
}

TEST_CASE("run_single rejects sweep configs and vice versa") {
  ExperimentConfig plain = parse_config(kMinimal);
  CHECK_THROWS_AS(run_sweep(plain, "unused"), std::invalid_argument);

  ExperimentConfig sweeping = parse_config(
      R"({ "problem": { "kind": "quadratic" }, "sweep": { "parameter": "gamma", "values": [1] } })");
  CHECK_THROWS_AS(run_single(sweeping, "unused"), std::invalid_argument);
}

TEST_CASE("export_data dumps per-agent csvs next to the trace") {
  ExperimentConfig cfg = parse_config(R"({
    "problem": { "kind": "synthetic", "p": 4, "train_total": 40, "val_total": 20,
                 "export_data": true },
    "topology": { "n": 2 },
    "algorithm": { "rounds": 1 }
  })");
  const auto dir = testsupport::fresh_temp_dir("export");
  const RunSummary s = run_single(cfg, dir.string());
  for (int i = 0; i < 2; ++i) {
    CHECK(fs::exists(fs::path(s.run_dir) / "data" / ("agent" + std::to_string(i) + "_train.csv")));
    CHECK(fs::exists(fs::path(s.run_dir) / "data" / ("agent" + std::to_string(i) + "_val.csv")));
  }
  fs::remove_all(dir);
}

TEST_CASE("softmax problems build from idx shards") {
  const auto dir = testsupport::fresh_temp_dir("softmax-build");
  const std::string img = (dir / "img.idx").string(), lab = (dir / "lab.idx").string();
  std::vector<unsigned char> pixels(40 * 4);
  std::vector<unsigned char> labels(40);
  Rng rng(5, "softmax-idx");
  for (auto& b : pixels) b = static_cast<unsigned char>(rng.index(256));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<unsigned char>(i % 3);
  testsupport::write_idx(img, lab, 40, 2, 2, pixels, labels);

  ProblemSection ps;
  ps.kind = "softmax";
  ps.train_images = ps.val_images = img;
  ps.train_labels = ps.val_labels = lab;
  ps.classes = 3;
  auto problem = build_problem(ps, 4);
  CHECK(problem->num_agents() == 4);
  CHECK(problem->upper_dim() == 4);
  CHECK(problem->lower_dim() == 12);
  fs::remove_all(dir);
}
