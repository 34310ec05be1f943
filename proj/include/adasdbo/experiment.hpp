#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adasdbo/algorithm.hpp"
#include "adasdbo/network.hpp"
#include "adasdbo/oracle.hpp"
#include "adasdbo/problems.hpp"

namespace adasdbo {

struct ProblemSection {
  std::string kind = "quadratic";  // quadratic | synthetic | softmax
  std::uint64_t seed = 1;
  // quadratic
  std::size_t p = 5, q = 5;
  double target_scale = 0.1, coupling_scale = 2.0, offset_scale = 0.7;
  // synthetic
  double r = 1.0;
  std::size_t train_total = 2000, val_total = 2000;
  std::optional<std::size_t> train_per_agent, val_per_agent;
  // softmax
  std::string train_images, train_labels, val_images, val_labels;
  int classes = 10;
  std::string partition = "equal";  // equal | by_class_skew
  double skew_fraction = 0.3;
  // Dump the per-agent datasets as CSV next to the trace (inspection aid;
  // not part of the run identity).
  bool export_data = false;
};

struct TopologySection {
  std::string kind = "ring";  // ring | ladder | random | complete
  std::size_t n = 5;
  double ring_w = 0.4;
  double edge_prob = 0.5;
  std::uint64_t topology_seed = 1;
};

struct AlgorithmSection {
  std::string kind = "adasdbo";  // adasdbo | const
  double gamma_x = 1.0, gamma_y = 1.0, gamma_v = 1.0;
  double m0 = 10.0;
  double eta_x = 0.01, eta_y = 0.02, eta_v = 0.01;
  // "auto" applies the default radius policy, "unbounded" disables the
  // projection, a positive number fixes the radius.
  std::string projection_radius = "auto";
  std::uint64_t rounds = 1000;
  std::string mix_accumulators = "squared";  // squared | linear
};

struct SweepSection {
  std::string parameter;  // gamma | eta | n | topology | ring_w | r
  std::vector<std::string> values;  // literal value spellings
};

struct OutputSection {
  std::string directory;
  std::vector<std::string> formats = {"csv"};
};

struct ExperimentConfig {
  ProblemSection problem;
  TopologySection topology;
  AlgorithmSection algorithm;
  OracleConfig oracle;
  std::optional<SweepSection> sweep;
  OutputSection output;
};

/// Parses and validates a config document (JSON with // comments allowed);
/// all defaults filled. Unknown or ill-typed keys raise ParseError naming
/// the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// 16-hex-digit content hash of the fully defaulted config; invariant to key
/// order, comments, and whitespace.
std::string config_hash(const ExperimentConfig& cfg);

/// Canonical JSON serialization of the defaulted config.
std::string canonical_config(const ExperimentConfig& cfg);

struct RunSummary {
  std::string config_hash;
  std::string algorithm;
  std::uint64_t rounds_requested = 0;
  std::uint64_t rounds_completed = 0;
  bool diverged = false;
  std::optional<std::uint64_t> divergence_round;
  std::optional<double> final_stationarity;
  std::optional<double> min_stationarity;
  std::optional<double> final_upper_loss;
  std::optional<double> final_lower_loss;
  std::optional<double> final_accuracy;
  double wall_seconds = 0.0;
  std::string trace_path;
  std::string summary_path;
  std::string run_dir;
};

/// Builds the problem/topology/algorithm from the config and executes one
/// run, writing <outdir>/<config-hash>/trace.csv (+ trace.jsonl) and
/// summary.json. Divergence is recorded in the summary, not thrown.
RunSummary run_single(const ExperimentConfig& cfg, const std::string& outdir, int threads = 1,
                      bool quiet = true);

/// One run per sweep value under <outdir>/<param>=<value>/, plus a
/// consolidated <outdir>/sweep.csv with one row per value. Per-run failures
/// are recorded and the sweep continues. `threads` workers run values
/// concurrently.
std::vector<RunSummary> run_sweep(const ExperimentConfig& cfg, const std::string& outdir,
                                  int threads = 1, bool quiet = true);

std::unique_ptr<BilevelProblem> build_problem(const ProblemSection& ps, std::size_t n_agents);
MixingMatrix build_topology(const TopologySection& ts);

}  // namespace adasdbo
