#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "support.hpp"

#include "adasdbo/errors.hpp"
#include "adasdbo/metrics.hpp"
#include "adasdbo/network.hpp"

using namespace adasdbo;
namespace fs = std::filesystem;

namespace {

SwarmState two_agent_state(double x0, double x1) {
  SwarmState s;
  s.agents.resize(2);
  for (auto& a : s.agents) {
    a.y = {0.5};
    a.v = {0.25};
    a.acc_x_sq = a.acc_y_sq = a.acc_v_sq = 1.0;
  }
  s.agents[0].x = {x0};
  s.agents[1].x = {x1};
  return s;
}

}  // namespace

TEST_CASE("consensus error of crafted states") {
  // Identical agents: zero.
  CHECK(consensus_error(two_agent_state(1.0, 1.0)) == 0.0);
  // x = {0, 2}: deviations +-1 in one scalar block.
  CHECK(consensus_error(two_agent_state(0.0, 2.0)) == doctest::Approx(2.0));
}

TEST_CASE("one complete-graph mixing round zeroes the consensus error") {
  const MixingMatrix W = MixingMatrix::complete(4);
  SwarmState s;
  s.agents.resize(4);
  Rng rng(7, "consensus");
  std::vector<Vec> xs(4, Vec(3)), ys(4, Vec(2)), vs(4, Vec(2));
  for (std::size_t i = 0; i < 4; ++i) {
    for (double& c : xs[i]) c = rng.normal();
    for (double& c : ys[i]) c = rng.normal();
    for (double& c : vs[i]) c = rng.normal();
  }
  const auto mx = W.mix(xs), my = W.mix(ys), mv = W.mix(vs);
  for (std::size_t i = 0; i < 4; ++i) {
    s.agents[i].x = mx[i];
    s.agents[i].y = my[i];
    s.agents[i].v = mv[i];
    s.agents[i].acc_x_sq = s.agents[i].acc_y_sq = s.agents[i].acc_v_sq = 1.0;
  }
  CHECK(consensus_error(s) <= 1e-24);
}

TEST_CASE("stepsize spread on crafted accumulators") {
  SwarmState s;
  s.agents.resize(2);
  for (auto& a : s.agents) {
    a.x = {0.0};
    a.y = {0.0};
    a.v = {0.0};
  }
  // u inverses {1, 3}: mean inverse 2, both deviations (+-1)^2 / 4 = 0.25.
  // acc_y = m_y^2 with m_y = 1 and 1/3.
  s.agents[0].acc_y_sq = 1.0;
  s.agents[1].acc_y_sq = 1.0 / 9.0;
  // Keep z = max(m_v, m_y) constant at 1 so only u varies:
  s.agents[0].acc_v_sq = 1.0;
  s.agents[1].acc_v_sq = 1.0;
  s.agents[0].acc_x_sq = 4.0;
  s.agents[1].acc_x_sq = 4.0;

  const StepsizeSpread sp = stepsize_spread(s);
  CHECK(sp.max_u == doctest::Approx(0.25));
  CHECK(sp.min_u == doctest::Approx(0.25));
  // z_i = max(m_v, m_y) = 1 for both: no spread.
  CHECK(sp.max_z == doctest::Approx(0.0));
  // q_i = m_x * z = 2 for both: no spread.
  CHECK(sp.max_q == doctest::Approx(0.0));

  // Identical accumulators: all deviations zero.
  s.agents[1].acc_y_sq = 1.0;
  const StepsizeSpread zero = stepsize_spread(s);
  CHECK(zero.max_u == 0.0);
  CHECK(zero.min_q == 0.0);
  CHECK(zero.max_z == 0.0);
}

TEST_CASE("test accuracy readouts") {
  SUBCASE("ground-truth weights score perfectly on near-noiseless labels") {
    RngSpec spec{41, "acc-perfect"};
    // heterogeneity 1 with p=12: signal std ~ sqrt(12) >> noise 0.1.
    SyntheticDataset data = generate_synthetic(2, 12, 10, 1000, 1.0, spec);
    const Vec w_star = data.ground_truth;
    const SyntheticLogisticHPO prob(std::move(data.agents));
    CHECK(test_accuracy(prob, w_star) >= 0.97);
  }
  SUBCASE("random weights sit at chance level") {
    RngSpec spec{43, "acc-chance"};
    SyntheticDataset data = generate_synthetic(2, 10, 10, 1000, 1.0, spec);
    const SyntheticLogisticHPO prob(std::move(data.agents));
    Rng rng(45, "random-w");
    double mean_acc = 0.0;
    const int trials = 20;
    for (int k = 0; k < trials; ++k) {
      Vec w(10);
      for (double& c : w) c = rng.normal();
      mean_acc += test_accuracy(prob, w);
    }
    mean_acc /= trials;
    CHECK(mean_acc == doctest::Approx(0.5).epsilon(0.1));
  }
  SUBCASE("uniform softmax scores the class-0 share on balanced labels") {
    AgentData a;
    a.validation.feature_dim = 2;
    a.validation.num_classes = 10;
    for (int e = 0; e < 200; ++e) {
      a.validation.features.push_back(1.0);
      a.validation.features.push_back(0.5);
      a.validation.class_labels.push_back(e % 10);  // exactly balanced
    }
    a.train = a.validation;
    const SoftmaxHPO prob({a}, 10, 2);
    CHECK(test_accuracy(prob, Vec(20, 0.0)) == doctest::Approx(0.1));
  }
  SUBCASE("quadratic problems expose no accuracy metric") {
    const QuadraticBilevel q = QuadraticBilevel::make_default(2, 2, 2, 1);
    CHECK_THROWS_AS(test_accuracy(q, Vec{0.0, 0.0}), UnsupportedMetric);
  }
}

TEST_CASE("csv sink writes the exact schema and round-trips bitwise") {
  const auto dir = testsupport::fresh_temp_dir("csv");
  const std::string path = (dir / "trace.csv").string();

  RoundTrace t0;
  t0.round = 0;
  t0.upper_loss = 1.0 / 3.0;
  t0.lower_loss = 0.1;
  t0.stationarity = 0.123456789012345678;
  t0.consensus_error = 0.0;
  t0.zeta_q = 1e-17;
  t0.mean_acc_x = 10.0;
  t0.mean_acc_y = 10.0;
  t0.mean_acc_v = 10.0;
  t0.term_b_norm = 2.5e-13;

  RoundTrace t1 = t0;
  t1.round = 1;
  t1.stationarity.reset();       // stride gap: empty field
  t1.test_accuracy = 0.7253;

  {
    CsvSink sink(path);
    sink.write(t0);
    sink.write(t1);
    sink.flush();
  }

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == std::string(kTraceCsvHeader));

  const auto traces = read_trace_csv(path);
  REQUIRE(traces.size() == 2);
  CHECK(traces[0].round == 0);
  CHECK(traces[0].upper_loss == t0.upper_loss);  // bitwise round-trip
  CHECK(traces[0].stationarity == t0.stationarity);
  CHECK(traces[0].zeta_q == t0.zeta_q);
  CHECK(traces[0].term_b_norm == t0.term_b_norm);
  CHECK(!traces[1].stationarity.has_value());
  CHECK(traces[1].test_accuracy == t1.test_accuracy);
  fs::remove_all(dir);
}

TEST_CASE("collector emits valid records for a quadratic run") {
  const QuadraticBilevel prob = QuadraticBilevel::make_default(3, 3, 5, 31);
  const MixingMatrix W = MixingMatrix::ring(5, 0.4);
  AdaSdboConfig cfg;
  cfg.rounds = 40;

  const auto dir = testsupport::fresh_temp_dir("collector");
  const std::string path = (dir / "trace.csv").string();
  CsvSink sink(path);
  MetricsCollector collector(prob, OracleConfig{}, {&sink});

  run_adasdbo(prob, W, cfg, InitSpec::zeros(3, 3), &collector);
  collector.finish();

  const auto traces = read_trace_csv(path);
  REQUIRE(traces.size() == 40);

  // First record reflects the identical zero initialization. Note term_b
  // need not vanish at round 0: the stepsize variables are post-accumulation
  // values and the local gradients already differ across agents.
  CHECK(traces[0].round == 0);
  CHECK(traces[0].consensus_error == 0.0);
  CHECK(traces[0].mean_acc_x == doctest::Approx(10.0));
  CHECK(traces[0].term_b_norm >= 0.0);

  double prev_acc = 0.0, prev_zeta = 0.0;
  double prev_sigma = 1e300;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const RoundTrace& t = traces[k];
    CHECK(t.round == k);
    CHECK(t.consensus_error >= 0.0);
    CHECK(t.zeta_q >= t.sigma_q);
    CHECK(t.zeta_u >= t.sigma_u);
    CHECK(t.zeta_z >= t.sigma_z);
    CHECK(t.mean_acc_x >= prev_acc);
    prev_acc = t.mean_acc_x;
    REQUIRE(t.stationarity.has_value());  // stride 1
    CHECK(*t.stationarity >= 0.0);
    if (k >= 1) {
      CHECK(t.zeta_q >= prev_zeta);
      CHECK(t.sigma_q <= prev_sigma);
      prev_zeta = t.zeta_q;
      prev_sigma = t.sigma_q;
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("collector respects the oracle stride") {
  const QuadraticBilevel prob = QuadraticBilevel::make_default(2, 2, 3, 33);
  const MixingMatrix W = MixingMatrix::complete(3);
  AdaSdboConfig cfg;
  cfg.rounds = 10;
  OracleConfig ocfg;
  ocfg.stride = 4;

  const auto dir = testsupport::fresh_temp_dir("stride");
  const std::string path = (dir / "trace.csv").string();
  CsvSink sink(path);
  MetricsCollector collector(prob, ocfg, {&sink});
  run_adasdbo(prob, W, cfg, InitSpec::zeros(2, 2), &collector);
  collector.finish();

  const auto traces = read_trace_csv(path);
  REQUIRE(traces.size() == 10);
  for (const auto& t : traces)
    CHECK(t.stationarity.has_value() == (t.round % 4 == 0));
  fs::remove_all(dir);
}

TEST_CASE("collector reports accuracy for problems with held-out data") {
  RngSpec spec{47, "collector-synthetic"};
  SyntheticDataset data = generate_synthetic(3, 6, 30, 30, 1.0, spec);
  const SyntheticLogisticHPO prob(std::move(data.agents));
  const MixingMatrix W = MixingMatrix::complete(3);
  AdaSdboConfig cfg;
  cfg.rounds = 6;
  OracleConfig ocfg;
  ocfg.stride = 2;

  const auto dir = testsupport::fresh_temp_dir("collector-acc");
  const std::string path = (dir / "trace.csv").string();
  CsvSink sink(path);
  MetricsCollector collector(prob, ocfg, {&sink});
  run_adasdbo(prob, W, cfg, InitSpec::zeros(6, 6), &collector);
  collector.finish();

  const auto traces = read_trace_csv(path);
  REQUIRE(traces.size() == 6);
  for (const auto& t : traces) {
    CHECK(t.test_accuracy.has_value() == (t.round % 2 == 0));
    if (t.test_accuracy) {
      CHECK(*t.test_accuracy >= 0.0);
      CHECK(*t.test_accuracy <= 1.0);
    }
  }
  CHECK(collector.final_accuracy().has_value());
  fs::remove_all(dir);
}

TEST_CASE("jsonl sink emits one object per round") {
  const auto dir = testsupport::fresh_temp_dir("jsonl");
  const std::string path = (dir / "trace.jsonl").string();
  RoundTrace t;
  t.round = 3;
  t.upper_loss = 0.5;
  {
    JsonlSink sink(path);
    sink.write(t);
    sink.flush();
  }
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.find("\"round\":3") != std::string::npos);
  CHECK(line.find("\"stationarity\"") == std::string::npos);  // absent optional
  fs::remove_all(dir);
}
