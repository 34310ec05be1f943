#include "adasdbo/experiment.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "adasdbo/data.hpp"
#include "adasdbo/errors.hpp"
#include "adasdbo/metrics.hpp"

namespace adasdbo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& section,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ParseError("unknown key '" + section + "." + key + "'");
  }
}

template <class T>
void read_field(const json& obj, const std::string& section, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("bad value type for '" + section + "." + std::string(key) + "'");
  }
}

std::string value_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config root must be an object");
  require_keys(doc, "", {"problem", "topology", "algorithm", "oracle", "sweep", "output"});

  ExperimentConfig cfg;

  if (doc.contains("problem")) {
    const json& p = doc["problem"];
    if (!p.is_object()) throw ParseError("'problem' must be an object");
    require_keys(p, "problem",
                 {"kind", "seed", "p", "q", "target_scale", "coupling_scale", "offset_scale", "r",
                  "train_total", "val_total", "train_per_agent", "val_per_agent", "train_images",
                  "train_labels", "val_images", "val_labels", "classes", "partition",
                  "skew_fraction", "export_data"});
    auto& ps = cfg.problem;
    read_field(p, "problem", "kind", ps.kind);
    read_field(p, "problem", "seed", ps.seed);
    read_field(p, "problem", "p", ps.p);
    read_field(p, "problem", "q", ps.q);
    read_field(p, "problem", "target_scale", ps.target_scale);
    read_field(p, "problem", "coupling_scale", ps.coupling_scale);
    read_field(p, "problem", "offset_scale", ps.offset_scale);
    read_field(p, "problem", "r", ps.r);
    read_field(p, "problem", "train_total", ps.train_total);
    read_field(p, "problem", "val_total", ps.val_total);
    if (p.contains("train_per_agent")) {
      std::size_t v = 0;
      read_field(p, "problem", "train_per_agent", v);
      ps.train_per_agent = v;
    }
    if (p.contains("val_per_agent")) {
      std::size_t v = 0;
      read_field(p, "problem", "val_per_agent", v);
      ps.val_per_agent = v;
    }
    read_field(p, "problem", "train_images", ps.train_images);
    read_field(p, "problem", "train_labels", ps.train_labels);
    read_field(p, "problem", "val_images", ps.val_images);
    read_field(p, "problem", "val_labels", ps.val_labels);
    read_field(p, "problem", "classes", ps.classes);
    read_field(p, "problem", "partition", ps.partition);
    read_field(p, "problem", "skew_fraction", ps.skew_fraction);
    read_field(p, "problem", "export_data", ps.export_data);
    if (ps.kind != "quadratic" && ps.kind != "synthetic" && ps.kind != "softmax")
      throw ParseError("problem.kind must be quadratic|synthetic|softmax, got '" + ps.kind + "'");
    if (ps.partition != "equal" && ps.partition != "by_class_skew")
      throw ParseError("problem.partition must be equal|by_class_skew");
  }

  if (doc.contains("topology")) {
    const json& t = doc["topology"];
    if (!t.is_object()) throw ParseError("'topology' must be an object");
    require_keys(t, "topology", {"kind", "n", "ring_w", "edge_prob", "topology_seed"});
    auto& ts = cfg.topology;
    read_field(t, "topology", "kind", ts.kind);
    read_field(t, "topology", "n", ts.n);
    read_field(t, "topology", "ring_w", ts.ring_w);
    read_field(t, "topology", "edge_prob", ts.edge_prob);
    read_field(t, "topology", "topology_seed", ts.topology_seed);
    if (ts.kind != "ring" && ts.kind != "ladder" && ts.kind != "random" && ts.kind != "complete")
      throw ParseError("topology.kind must be ring|ladder|random|complete, got '" + ts.kind + "'");
    if (ts.n == 0) throw ParseError("topology.n must be positive");
  }

  if (doc.contains("algorithm")) {
    const json& a = doc["algorithm"];
    if (!a.is_object()) throw ParseError("'algorithm' must be an object");
    require_keys(a, "algorithm",
                 {"kind", "gamma_x", "gamma_y", "gamma_v", "m0", "eta_x", "eta_y", "eta_v",
                  "projection_radius", "rounds", "mix_accumulators"});
    auto& as = cfg.algorithm;
    read_field(a, "algorithm", "kind", as.kind);
    read_field(a, "algorithm", "gamma_x", as.gamma_x);
    read_field(a, "algorithm", "gamma_y", as.gamma_y);
    read_field(a, "algorithm", "gamma_v", as.gamma_v);
    read_field(a, "algorithm", "m0", as.m0);
    read_field(a, "algorithm", "eta_x", as.eta_x);
    read_field(a, "algorithm", "eta_y", as.eta_y);
    read_field(a, "algorithm", "eta_v", as.eta_v);
    if (a.contains("projection_radius")) {
      const json& pr = a["projection_radius"];
      if (pr.is_string())
        as.projection_radius = pr.get<std::string>();
      else if (pr.is_number())
        as.projection_radius = pr.dump();
      else
        throw ParseError("algorithm.projection_radius must be a number, 'auto' or 'unbounded'");
    }
    read_field(a, "algorithm", "rounds", as.rounds);
    read_field(a, "algorithm", "mix_accumulators", as.mix_accumulators);
    if (as.kind != "adasdbo" && as.kind != "const")
      throw ParseError("algorithm.kind must be adasdbo|const, got '" + as.kind + "'");
    if (as.mix_accumulators != "squared" && as.mix_accumulators != "linear")
      throw ParseError("algorithm.mix_accumulators must be squared|linear");
    if (as.rounds < 1) throw ParseError("algorithm.rounds must be >= 1");
    if (as.projection_radius != "auto" && as.projection_radius != "unbounded") {
      double v = 0.0;
      const auto res = std::from_chars(as.projection_radius.data(),
                                       as.projection_radius.data() + as.projection_radius.size(),
                                       v);
      if (res.ec != std::errc() ||
          res.ptr != as.projection_radius.data() + as.projection_radius.size() || !(v > 0.0))
        throw ParseError("algorithm.projection_radius must be a positive number, 'auto' or "
                         "'unbounded'");
    }
  }

  if (doc.contains("oracle")) {
    const json& o = doc["oracle"];
    if (!o.is_object()) throw ParseError("'oracle' must be an object");
    require_keys(o, "oracle",
                 {"inner_tol", "cg_tol", "max_inner_iters", "max_cg_iters", "stride"});
    auto& os = cfg.oracle;
    read_field(o, "oracle", "inner_tol", os.inner_tol);
    read_field(o, "oracle", "cg_tol", os.cg_tol);
    read_field(o, "oracle", "max_inner_iters", os.max_inner_iters);
    read_field(o, "oracle", "max_cg_iters", os.max_cg_iters);
    read_field(o, "oracle", "stride", os.stride);
    try {
      os.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("oracle section: ") + e.what());
    }
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    if (!s.is_object()) throw ParseError("'sweep' must be an object");
    require_keys(s, "sweep", {"parameter", "values"});
    SweepSection sw;
    read_field(s, "sweep", "parameter", sw.parameter);
    if (!s.contains("values") || !s["values"].is_array() || s["values"].empty())
      throw ParseError("sweep.values must be a nonempty array");
    for (const json& v : s["values"]) sw.values.push_back(value_to_string(v));
    const bool known = sw.parameter == "gamma" || sw.parameter == "eta" || sw.parameter == "n" ||
                       sw.parameter == "topology" || sw.parameter == "ring_w" ||
                       sw.parameter == "r";
    if (!known)
      throw ParseError("sweep.parameter must be gamma|eta|n|topology|ring_w|r, got '" +
                       sw.parameter + "'");
    cfg.sweep = std::move(sw);
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    if (!o.is_object()) throw ParseError("'output' must be an object");
    require_keys(o, "output", {"directory", "formats"});
    read_field(o, "output", "directory", cfg.output.directory);
    if (o.contains("formats")) {
      cfg.output.formats.clear();
      for (const json& f : o["formats"]) {
        const std::string fmt = f.get<std::string>();
        if (fmt != "csv" && fmt != "jsonl") throw ParseError("output.formats: unknown format " + fmt);
        cfg.output.formats.push_back(fmt);
      }
      if (cfg.output.formats.empty()) throw ParseError("output.formats must be nonempty");
    }
  }

  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  json doc;
  json& p = doc["problem"];
  p["kind"] = cfg.problem.kind;
  p["seed"] = cfg.problem.seed;
  if (cfg.problem.kind == "quadratic") {
    p["p"] = cfg.problem.p;
    p["q"] = cfg.problem.q;
    p["target_scale"] = cfg.problem.target_scale;
    p["coupling_scale"] = cfg.problem.coupling_scale;
    p["offset_scale"] = cfg.problem.offset_scale;
  } else if (cfg.problem.kind == "synthetic") {
    p["p"] = cfg.problem.p;
    p["r"] = cfg.problem.r;
    p["train_total"] = cfg.problem.train_total;
    p["val_total"] = cfg.problem.val_total;
    if (cfg.problem.train_per_agent) p["train_per_agent"] = *cfg.problem.train_per_agent;
    if (cfg.problem.val_per_agent) p["val_per_agent"] = *cfg.problem.val_per_agent;
  } else {
    p["train_images"] = cfg.problem.train_images;
    p["train_labels"] = cfg.problem.train_labels;
    p["val_images"] = cfg.problem.val_images;
    p["val_labels"] = cfg.problem.val_labels;
    p["classes"] = cfg.problem.classes;
    p["partition"] = cfg.problem.partition;
    if (cfg.problem.partition == "by_class_skew") p["skew_fraction"] = cfg.problem.skew_fraction;
  }

  json& t = doc["topology"];
  t["kind"] = cfg.topology.kind;
  t["n"] = cfg.topology.n;
  if (cfg.topology.kind == "ring") t["ring_w"] = cfg.topology.ring_w;
  if (cfg.topology.kind == "random") {
    t["edge_prob"] = cfg.topology.edge_prob;
    t["topology_seed"] = cfg.topology.topology_seed;
  }

  json& a = doc["algorithm"];
  a["kind"] = cfg.algorithm.kind;
  a["rounds"] = cfg.algorithm.rounds;
  a["projection_radius"] = cfg.algorithm.projection_radius;
  if (cfg.algorithm.kind == "adasdbo") {
    a["gamma_x"] = cfg.algorithm.gamma_x;
    a["gamma_y"] = cfg.algorithm.gamma_y;
    a["gamma_v"] = cfg.algorithm.gamma_v;
    a["m0"] = cfg.algorithm.m0;
    a["mix_accumulators"] = cfg.algorithm.mix_accumulators;
  } else {
    a["eta_x"] = cfg.algorithm.eta_x;
    a["eta_y"] = cfg.algorithm.eta_y;
    a["eta_v"] = cfg.algorithm.eta_v;
  }

  json& o = doc["oracle"];
  o["inner_tol"] = cfg.oracle.inner_tol;
  o["cg_tol"] = cfg.oracle.cg_tol;
  o["max_inner_iters"] = cfg.oracle.max_inner_iters;
  o["max_cg_iters"] = cfg.oracle.max_cg_iters;
  o["stride"] = cfg.oracle.stride;

  if (cfg.sweep) {
    json& s = doc["sweep"];
    s["parameter"] = cfg.sweep->parameter;
    s["values"] = cfg.sweep->values;
  }
  // The output section is delivery plumbing, not run identity: the hash must
  // not change when results are redirected elsewhere.
  return doc.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canon = canonical_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::unique_ptr<BilevelProblem> build_problem(const ProblemSection& ps, std::size_t n_agents) {
  if (ps.kind == "quadratic") {
    return std::make_unique<QuadraticBilevel>(QuadraticBilevel::make_default(
        ps.p, ps.q, n_agents, ps.seed, ps.target_scale, ps.coupling_scale, ps.offset_scale));
  }
  if (ps.kind == "synthetic") {
    const std::size_t train_each = ps.train_per_agent.value_or(ps.train_total / n_agents);
    const std::size_t val_each = ps.val_per_agent.value_or(ps.val_total / n_agents);
    RngSpec rng{ps.seed, "synthetic"};
    SyntheticDataset data =
        generate_synthetic(n_agents, ps.p, train_each, val_each, ps.r, rng);
    return std::make_unique<SyntheticLogisticHPO>(std::move(data.agents));
  }
  // softmax: load the IDX pairs and shard them across agents.
  Dataset train = load_idx(ps.train_images, ps.train_labels);
  Dataset val = load_idx(ps.val_images, ps.val_labels);
  train.num_classes = val.num_classes = ps.classes;
  train.validate();
  val.validate();
  const PartitionPolicy policy =
      ps.partition == "equal" ? PartitionPolicy::equal : PartitionPolicy::by_class_skew;
  Rng prng(ps.seed, "partition");
  std::vector<Dataset> train_shards = partition(train, n_agents, policy, ps.skew_fraction, prng);
  std::vector<Dataset> val_shards = partition(val, n_agents, policy, ps.skew_fraction, prng);
  std::vector<AgentData> agents(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    agents[i].train = std::move(train_shards[i]);
    agents[i].validation = std::move(val_shards[i]);
    agents[i].validation.split = Split::validation;
  }
  return std::make_unique<SoftmaxHPO>(std::move(agents), ps.classes, train.feature_dim);
}

MixingMatrix build_topology(const TopologySection& ts) {
  if (ts.kind == "ring") return MixingMatrix::ring(ts.n, ts.ring_w);
  if (ts.kind == "ladder") return MixingMatrix::ladder(ts.n);
  if (ts.kind == "random") return MixingMatrix::random(ts.n, ts.edge_prob, ts.topology_seed);
  return MixingMatrix::complete(ts.n);
}

namespace {

std::optional<double> resolve_projection_radius(const AlgorithmSection& as,
                                                const BilevelProblem& problem,
                                                const InitSpec& init) {
  if (as.projection_radius == "unbounded") return std::nullopt;
  if (as.projection_radius == "auto") return default_projection_radius(problem, init);
  return std::stod(as.projection_radius);
}

std::string format_double_short(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["config_hash"] = s.config_hash;
  j["algorithm"] = s.algorithm;
  j["rounds_requested"] = s.rounds_requested;
  j["rounds_completed"] = s.rounds_completed;
  j["diverged"] = s.diverged;
  j["divergence_round"] = s.divergence_round ? json(*s.divergence_round) : json();
  j["final_stationarity"] = s.final_stationarity ? json(*s.final_stationarity) : json();
  j["min_stationarity"] = s.min_stationarity ? json(*s.min_stationarity) : json();
  j["final_upper_loss"] = s.final_upper_loss ? json(*s.final_upper_loss) : json();
  j["final_lower_loss"] = s.final_lower_loss ? json(*s.final_lower_loss) : json();
  j["final_accuracy"] = s.final_accuracy ? json(*s.final_accuracy) : json();
  j["wall_seconds"] = s.wall_seconds;
  j["trace_path"] = s.trace_path;
  return j;
}

}  // namespace

RunSummary run_single(const ExperimentConfig& cfg, const std::string& outdir, int threads,
                      bool quiet) {
  if (cfg.sweep) throw std::invalid_argument("run_single: config carries a sweep section");

  const std::string hash = config_hash(cfg);
  const fs::path run_dir = fs::path(outdir) / hash;
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create " + run_dir.string() + ": " + ec.message());

  std::unique_ptr<BilevelProblem> problem = build_problem(cfg.problem, cfg.topology.n);
  const MixingMatrix W = build_topology(cfg.topology);
  const InitSpec init = InitSpec::zeros(problem->upper_dim(), problem->lower_dim());

  RunSummary summary;
  summary.config_hash = hash;
  summary.algorithm = cfg.algorithm.kind;
  summary.rounds_requested = cfg.algorithm.rounds;
  summary.run_dir = run_dir.string();
  summary.trace_path = (run_dir / "trace.csv").string();
  summary.summary_path = (run_dir / "summary.json").string();

  {
    std::ofstream cfg_out(run_dir / "config.json");
    cfg_out << canonical_config(cfg) << '\n';
  }

  if (cfg.problem.export_data) {
    const fs::path data_dir = run_dir / "data";
    fs::create_directories(data_dir, ec);
    auto dump = [&](const AgentData& a, std::size_t i) {
      export_csv(a.train, (data_dir / ("agent" + std::to_string(i) + "_train.csv")).string());
      export_csv(a.validation, (data_dir / ("agent" + std::to_string(i) + "_val.csv")).string());
    };
    if (const auto* syn = dynamic_cast<const SyntheticLogisticHPO*>(problem.get())) {
      for (std::size_t i = 0; i < syn->num_agents(); ++i) dump(syn->agent_data(i), i);
    } else if (const auto* soft = dynamic_cast<const SoftmaxHPO*>(problem.get())) {
      for (std::size_t i = 0; i < soft->num_agents(); ++i) dump(soft->agent_data(i), i);
    }
  }

  // trace.csv is the canonical artifact and always written; "jsonl" in the
  // formats list adds trace.jsonl alongside it.
  std::vector<std::unique_ptr<MetricSink>> owned_sinks;
  std::vector<MetricSink*> sinks;
  owned_sinks.push_back(std::make_unique<CsvSink>(summary.trace_path));
  for (const std::string& fmt : cfg.output.formats)
    if (fmt == "jsonl")
      owned_sinks.push_back(std::make_unique<JsonlSink>((run_dir / "trace.jsonl").string()));
  for (auto& s : owned_sinks) sinks.push_back(s.get());

  MetricsCollector collector(*problem, cfg.oracle, sinks);

  const auto radius = resolve_projection_radius(cfg.algorithm, *problem, init);
  const auto t_start = std::chrono::steady_clock::now();
  try {
    RunResult result;
    if (cfg.algorithm.kind == "adasdbo") {
      AdaSdboConfig acfg;
      acfg.gamma_x = cfg.algorithm.gamma_x;
      acfg.gamma_y = cfg.algorithm.gamma_y;
      acfg.gamma_v = cfg.algorithm.gamma_v;
      acfg.m0 = cfg.algorithm.m0;
      acfg.projection_radius = radius;
      acfg.rounds = cfg.algorithm.rounds;
      acfg.mix_accumulators = cfg.algorithm.mix_accumulators == "squared"
                                  ? AccumulatorMixing::squared
                                  : AccumulatorMixing::linear;
      result = run_adasdbo(*problem, W, acfg, init, &collector, threads);
    } else {
      ConstConfig ccfg;
      ccfg.eta_x = cfg.algorithm.eta_x;
      ccfg.eta_y = cfg.algorithm.eta_y;
      ccfg.eta_v = cfg.algorithm.eta_v;
      ccfg.projection_radius = radius;
      ccfg.rounds = cfg.algorithm.rounds;
      result = run_const(*problem, W, ccfg, init, &collector, threads);
    }
    summary.rounds_completed = result.rounds_completed;
    summary.wall_seconds = result.wall_seconds;
  } catch (const DivergenceError& e) {
    summary.diverged = true;
    summary.divergence_round = e.round();
    summary.rounds_completed = collector.rounds_seen();
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  }

  collector.finish();
  summary.min_stationarity = collector.min_stationarity();
  summary.final_stationarity = collector.final_stationarity();
  summary.final_accuracy = collector.final_accuracy();
  if (collector.last_trace()) {
    summary.final_upper_loss = collector.last_trace()->upper_loss;
    summary.final_lower_loss = collector.last_trace()->lower_loss;
  }

  {
    std::ofstream out(summary.summary_path);
    if (!out) throw IoError("cannot write " + summary.summary_path);
    out << summary_to_json(summary).dump(2) << '\n';
  }

  if (!quiet) {
    std::ostringstream msg;
    msg << "[" << hash << "] " << cfg.algorithm.kind << " rounds=" << summary.rounds_completed
        << "/" << summary.rounds_requested;
    if (summary.diverged) msg << " DIVERGED@" << *summary.divergence_round;
    if (summary.final_stationarity)
      msg << " stationarity=" << format_double_short(*summary.final_stationarity);
    if (summary.final_accuracy)
      msg << " accuracy=" << format_double_short(*summary.final_accuracy);
    std::fprintf(stdout, "%s\n", msg.str().c_str());
  }
  return summary;
}

namespace {

ExperimentConfig apply_sweep_value(ExperimentConfig base, const std::string& param,
                                   const std::string& value) {
  base.sweep.reset();
  auto as_double = [&] {
    try {
      return std::stod(value);
    } catch (...) {
      throw ParseError("sweep value '" + value + "' is not numeric");
    }
  };
  if (param == "gamma") {
    const double g = as_double();
    base.algorithm.gamma_x = base.algorithm.gamma_y = base.algorithm.gamma_v = g;
  } else if (param == "eta") {
    const double e = as_double();
    base.algorithm.eta_x = base.algorithm.eta_y = base.algorithm.eta_v = e;
  } else if (param == "n") {
    base.topology.n = static_cast<std::size_t>(as_double());
  } else if (param == "ring_w") {
    base.topology.ring_w = as_double();
  } else if (param == "r") {
    base.problem.r = as_double();
  } else if (param == "topology") {
    base.topology.kind = value;
  }
  return base;
}

std::string sanitize_for_path(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ||
                                 c == '.' || c == '-' || c == '+' ? c : '_');
  return out;
}

}  // namespace

std::vector<RunSummary> run_sweep(const ExperimentConfig& cfg, const std::string& outdir,
                                  int threads, bool quiet) {
  if (!cfg.sweep) throw std::invalid_argument("run_sweep: config lacks a sweep section");
  const SweepSection sweep = *cfg.sweep;

  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir + ": " + ec.message());

  const std::size_t count = sweep.values.size();
  std::vector<RunSummary> summaries(count);
  std::vector<std::string> errors(count);

  // One worker per run; within-run execution stays single threaded so the
  // schedule cannot alter any emitted byte.
  std::vector<std::thread> pool;
  std::mutex print_mu;
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        const std::string& value = sweep.values[i];
        const std::string subdir =
            (fs::path(outdir) / (sweep.parameter + "=" + sanitize_for_path(value))).string();
        try {
          const ExperimentConfig run_cfg = apply_sweep_value(cfg, sweep.parameter, value);
          summaries[i] = run_single(run_cfg, subdir, /*threads=*/1, /*quiet=*/true);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
        if (!quiet) {
          std::lock_guard<std::mutex> lk(print_mu);
          std::fprintf(stdout, "sweep %s=%s: %s\n", sweep.parameter.c_str(), value.c_str(),
                       errors[i].empty()
                           ? (summaries[i].diverged ? "diverged" : "done")
                           : errors[i].c_str());
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  const fs::path sweep_csv = fs::path(outdir) / "sweep.csv";
  std::ofstream out(sweep_csv, std::ios::trunc);
  if (!out) throw IoError("cannot write " + sweep_csv.string());
  out << "value,final_accuracy,final_stationarity,diverged\n";
  for (std::size_t i = 0; i < count; ++i) {
    const RunSummary& s = summaries[i];
    out << sweep.values[i] << ',';
    if (errors[i].empty()) {
      out << (s.final_accuracy ? format_double_short(*s.final_accuracy) : std::string()) << ','
          << (s.final_stationarity ? format_double_short(*s.final_stationarity) : std::string())
          << ',' << (s.diverged ? 1 : 0) << '\n';
    } else {
      out << ",," << "error:" << errors[i] << '\n';
    }
  }
  out.flush();
  if (!out) throw IoError("write failed on " + sweep_csv.string());
  return summaries;
}

}  // namespace adasdbo
