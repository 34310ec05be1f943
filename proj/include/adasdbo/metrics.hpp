#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adasdbo/algorithm.hpp"
#include "adasdbo/oracle.hpp"

namespace adasdbo {

/// One per-round diagnostics record. zeta_* / sigma_* are the running
/// sup/inf of the relative squared stepsize deviations over rounds >= 1
/// (round 0 starts from a shared accumulator, so its spread is zero by
/// construction and excluded from the running extrema).
struct RoundTrace {
  std::uint64_t round = 0;
  double upper_loss = 0.0;
  double lower_loss = 0.0;
  std::optional<double> stationarity;
  double consensus_error = 0.0;
  double zeta_q = 0.0, zeta_u = 0.0, zeta_z = 0.0;
  double sigma_q = 0.0, sigma_u = 0.0, sigma_z = 0.0;
  double mean_acc_x = 0.0, mean_acc_y = 0.0, mean_acc_v = 0.0;
  std::optional<double> test_accuracy;
  double term_b_norm = 0.0;
};

inline constexpr const char* kTraceCsvHeader =
    "round,upper_loss,lower_loss,stationarity,consensus_error,zeta_q,zeta_u,zeta_z,"
    "sigma_q,sigma_u,sigma_z,mean_acc_x,mean_acc_y,mean_acc_v,test_accuracy,term_b_norm";

/// Total squared deviation of all agents' iterates from the network
/// averages, over the x, y and v blocks.
double consensus_error(const SwarmState& swarm);

/// Instantaneous relative squared deviations of the inverse stepsize
/// variables q_i = m^x_i max(m^v_i, m^y_i), u_i = m^y_i, z_i = max(m^v_i,
/// m^y_i) computed from the swarm's tracked accumulators; deviations are
/// measured against the mean of the inverses.
struct StepsizeSpread {
  double max_q = 0.0, min_q = 0.0;
  double max_u = 0.0, min_u = 0.0;
  double max_z = 0.0, min_z = 0.0;
};
StepsizeSpread stepsize_spread(const SwarmState& swarm);

/// Held-out accuracy of lower-level model w; throws UnsupportedMetric for
/// problems without held-out data.
double test_accuracy(const BilevelProblem& problem, const Vec& w);

class MetricSink {
 public:
  virtual ~MetricSink() = default;
  virtual void write(const RoundTrace& trace) = 0;
  virtual void flush() = 0;
};

/// CSV sink with the fixed header above; absent optionals serialize as
/// empty fields, floats as shortest round-trip decimals.
class CsvSink : public MetricSink {
 public:
  explicit CsvSink(const std::string& path);
  void write(const RoundTrace& trace) override;
  void flush() override;

 private:
  std::ofstream out_;
  std::string path_;
};

class JsonlSink : public MetricSink {
 public:
  explicit JsonlSink(const std::string& path);
  void write(const RoundTrace& trace) override;
  void flush() override;

 private:
  std::ofstream out_;
  std::string path_;
};

std::vector<RoundTrace> read_trace_csv(const std::string& path);

/// Builds a RoundTrace per executed round and forwards it to the sinks.
/// Losses are evaluated at the averaged iterates on the averaged objective;
/// stationarity and test accuracy come from the reference oracle at the
/// configured stride. Also validates the bookkeeping invariants (mean
/// accumulator conservation and monotonicity) every round.
class MetricsCollector : public RoundObserver {
 public:
  MetricsCollector(const BilevelProblem& problem, const OracleConfig& oracle_cfg,
                   std::vector<MetricSink*> sinks);

  void on_round(const SwarmState& state, const StepDiagnostics& diag) override;
  void on_abort() override;

  std::optional<double> min_stationarity() const override { return min_stationarity_; }
  std::optional<double> final_stationarity() const override { return final_stationarity_; }
  std::optional<double> final_accuracy() const { return final_accuracy_; }
  const std::optional<RoundTrace>& last_trace() const { return last_trace_; }
  std::uint64_t rounds_seen() const { return rounds_seen_; }

  void finish();  // flush sinks at run end

 private:
  const BilevelProblem& problem_;
  Oracle oracle_;
  std::vector<MetricSink*> sinks_;

  std::uint64_t rounds_seen_ = 0;
  bool supports_accuracy_ = true;
  bool oracle_usable_ = true;
  double zeta_q_ = 0.0, zeta_u_ = 0.0, zeta_z_ = 0.0;
  std::optional<double> sigma_q_, sigma_u_, sigma_z_;
  std::optional<double> min_stationarity_, final_stationarity_, final_accuracy_;
  std::optional<RoundTrace> last_trace_;

  // Invariant bookkeeping for the tracking recursion.
  std::optional<double> m0_sq_;
  double expected_extra_x_ = 0.0, expected_extra_y_ = 0.0, expected_extra_v_ = 0.0;
  double prev_mean_acc_x_ = 0.0, prev_mean_acc_y_ = 0.0, prev_mean_acc_v_ = 0.0;
};

}  // namespace adasdbo
