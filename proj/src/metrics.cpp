#include "adasdbo/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "adasdbo/errors.hpp"

namespace adasdbo {

double consensus_error(const SwarmState& swarm) {
  const Vec xbar = swarm.mean_x(), ybar = swarm.mean_y(), vbar = swarm.mean_v();
  double total = 0.0;
  for (const AgentState& a : swarm.agents) {
    total += norm_sq(sub(a.x, xbar));
    total += norm_sq(sub(a.y, ybar));
    total += norm_sq(sub(a.v, vbar));
  }
  return total;
}

namespace {

// Relative squared deviations of inverse values against their mean.
void spread_of(const Vec& values, double& mx, double& mn) {
  const std::size_t n = values.size();
  double mean_inv = 0.0;
  for (double v : values) mean_inv += 1.0 / v;
  mean_inv /= static_cast<double>(n);
  mx = 0.0;
  mn = 1e308;
  for (double v : values) {
    const double d = (1.0 / v - mean_inv) / mean_inv;
    const double dd = d * d;
    mx = std::max(mx, dd);
    mn = std::min(mn, dd);
  }
}

}  // namespace

StepsizeSpread stepsize_spread(const SwarmState& swarm) {
  const std::size_t n = swarm.agents.size();
  Vec q(n), u(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentState& a = swarm.agents[i];
    const double mx = std::sqrt(a.acc_x_sq);
    const double my = std::sqrt(a.acc_y_sq);
    const double mv = std::sqrt(a.acc_v_sq);
    u[i] = my;
    z[i] = std::max(mv, my);
    q[i] = mx * z[i];
  }
  StepsizeSpread s;
  spread_of(q, s.max_q, s.min_q);
  spread_of(u, s.max_u, s.min_u);
  spread_of(z, s.max_z, s.min_z);
  return s;
}

double test_accuracy(const BilevelProblem& problem, const Vec& w) {
  const auto acc = problem.validation_accuracy(w);
  if (!acc) throw UnsupportedMetric("problem exposes no held-out evaluation data");
  return *acc;
}

namespace {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

CsvSink::CsvSink(const std::string& path) : out_(path, std::ios::trunc), path_(path) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  out_ << kTraceCsvHeader << '\n';
  if (!out_) throw IoError("write failed on " + path);
}

void CsvSink::write(const RoundTrace& t) {
  out_ << t.round << ',' << format_double(t.upper_loss) << ',' << format_double(t.lower_loss)
       << ',' << format_optional(t.stationarity) << ',' << format_double(t.consensus_error) << ','
       << format_double(t.zeta_q) << ',' << format_double(t.zeta_u) << ','
       << format_double(t.zeta_z) << ',' << format_double(t.sigma_q) << ','
       << format_double(t.sigma_u) << ',' << format_double(t.sigma_z) << ','
       << format_double(t.mean_acc_x) << ',' << format_double(t.mean_acc_y) << ','
       << format_double(t.mean_acc_v) << ',' << format_optional(t.test_accuracy) << ','
       << format_double(t.term_b_norm) << '\n';
  if (!out_) throw IoError("write failed on " + path_);
}

void CsvSink::flush() {
  out_.flush();
  if (!out_) throw IoError("flush failed on " + path_);
}

JsonlSink::JsonlSink(const std::string& path) : out_(path, std::ios::trunc), path_(path) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
}

void JsonlSink::write(const RoundTrace& t) {
  std::ostringstream line;
  line << "{\"round\":" << t.round << ",\"upper_loss\":" << format_double(t.upper_loss)
       << ",\"lower_loss\":" << format_double(t.lower_loss);
  if (t.stationarity) line << ",\"stationarity\":" << format_double(*t.stationarity);
  line << ",\"consensus_error\":" << format_double(t.consensus_error)
       << ",\"zeta_q\":" << format_double(t.zeta_q) << ",\"zeta_u\":" << format_double(t.zeta_u)
       << ",\"zeta_z\":" << format_double(t.zeta_z) << ",\"sigma_q\":" << format_double(t.sigma_q)
       << ",\"sigma_u\":" << format_double(t.sigma_u)
       << ",\"sigma_z\":" << format_double(t.sigma_z)
       << ",\"mean_acc_x\":" << format_double(t.mean_acc_x)
       << ",\"mean_acc_y\":" << format_double(t.mean_acc_y)
       << ",\"mean_acc_v\":" << format_double(t.mean_acc_v);
  if (t.test_accuracy) line << ",\"test_accuracy\":" << format_double(*t.test_accuracy);
  line << ",\"term_b_norm\":" << format_double(t.term_b_norm) << "}";
  out_ << line.str() << '\n';
  if (!out_) throw IoError("write failed on " + path_);
}

void JsonlSink::flush() {
  out_.flush();
  if (!out_) throw IoError("flush failed on " + path_);
}

std::vector<RoundTrace> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (line != kTraceCsvHeader) throw ParseError(path + ": unexpected header");

  auto parse_double = [&](const std::string& field) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
      throw ParseError(path + ": bad numeric field '" + field + "'");
    return v;
  };

  std::vector<RoundTrace> traces;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 16) throw ParseError(path + ": expected 16 fields per row");
    RoundTrace t;
    t.round = std::strtoull(fields[0].c_str(), nullptr, 10);
    t.upper_loss = parse_double(fields[1]);
    t.lower_loss = parse_double(fields[2]);
    if (!fields[3].empty()) t.stationarity = parse_double(fields[3]);
    t.consensus_error = parse_double(fields[4]);
    t.zeta_q = parse_double(fields[5]);
    t.zeta_u = parse_double(fields[6]);
    t.zeta_z = parse_double(fields[7]);
    t.sigma_q = parse_double(fields[8]);
    t.sigma_u = parse_double(fields[9]);
    t.sigma_z = parse_double(fields[10]);
    t.mean_acc_x = parse_double(fields[11]);
    t.mean_acc_y = parse_double(fields[12]);
    t.mean_acc_v = parse_double(fields[13]);
    if (!fields[14].empty()) t.test_accuracy = parse_double(fields[14]);
    t.term_b_norm = parse_double(fields[15]);
    traces.push_back(t);
  }
  return traces;
}

MetricsCollector::MetricsCollector(const BilevelProblem& problem, const OracleConfig& oracle_cfg,
                                   std::vector<MetricSink*> sinks)
    : problem_(problem), oracle_(problem, oracle_cfg), sinks_(std::move(sinks)) {}

void MetricsCollector::on_round(const SwarmState& state, const StepDiagnostics& diag) {
  const std::size_t n = state.agents.size();
  RoundTrace t;
  t.round = state.round;

  const Vec xbar = state.mean_x(), ybar = state.mean_y();
  double fl = 0.0, ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fl += problem_.upper_loss(i, xbar, ybar);
    ll += problem_.lower_loss(i, xbar, ybar);
  }
  t.upper_loss = fl / static_cast<double>(n);
  t.lower_loss = ll / static_cast<double>(n);
  if (!std::isfinite(t.upper_loss) || !std::isfinite(t.lower_loss))
    throw DivergenceError(state.round, DivergenceError::no_agent,
                          "averaged iterate left the evaluable domain");

  t.consensus_error = consensus_error(state);
  t.term_b_norm = norm(diag.term_b);

  // Mean accumulator magnitudes (square roots of the tracked squares).
  double sx = 0.0, sy = 0.0, sv = 0.0;
  double kx = 0.0, ky = 0.0, kv = 0.0;
  for (const AgentState& a : state.agents) {
    sx += std::sqrt(a.acc_x_sq);
    sy += std::sqrt(a.acc_y_sq);
    sv += std::sqrt(a.acc_v_sq);
    kx += a.acc_x_sq;
    ky += a.acc_y_sq;
    kv += a.acc_v_sq;
  }
  const double dn = static_cast<double>(n);
  t.mean_acc_x = sx / dn;
  t.mean_acc_y = sy / dn;
  t.mean_acc_v = sv / dn;
  kx /= dn;
  ky /= dn;
  kv /= dn;

  if (diag.accumulators_active) {
    if (diag.accumulators_mean_conserving) {
      if (!m0_sq_) {
        // First record carries the untouched initial accumulators.
        m0_sq_ = kx;
      } else {
        // Tracking conservation: mean of tracked squares equals m0^2 plus
        // the mean of everything accumulated so far.
        auto check = [&](double observed, double extra, const char* tag) {
          const double expected = *m0_sq_ + extra / dn;
          if (std::abs(observed - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
            throw std::logic_error(std::string("tracking conservation violated for ") + tag +
                                   " at round " + std::to_string(state.round));
        };
        check(kx, expected_extra_x_, "x");
        check(ky, expected_extra_y_, "y");
        check(kv, expected_extra_v_, "v");
      }
      if (rounds_seen_ > 0) {
        const double slack = 1e-9;
        if (kx < prev_mean_acc_x_ * (1.0 - slack) || ky < prev_mean_acc_y_ * (1.0 - slack) ||
            kv < prev_mean_acc_v_ * (1.0 - slack))
          throw std::logic_error("mean accumulator decreased at round " +
                                 std::to_string(state.round));
      }
      prev_mean_acc_x_ = kx;
      prev_mean_acc_y_ = ky;
      prev_mean_acc_v_ = kv;
      expected_extra_x_ += diag.sum_h_x;
      expected_extra_y_ += diag.sum_h_y;
      expected_extra_v_ += diag.sum_h_v;
    }

    if (state.round > 0) {
      const StepsizeSpread sp = stepsize_spread(state);
      zeta_q_ = std::max(zeta_q_, sp.max_q);
      zeta_u_ = std::max(zeta_u_, sp.max_u);
      zeta_z_ = std::max(zeta_z_, sp.max_z);
      sigma_q_ = sigma_q_ ? std::min(*sigma_q_, sp.min_q) : sp.min_q;
      sigma_u_ = sigma_u_ ? std::min(*sigma_u_, sp.min_u) : sp.min_u;
      sigma_z_ = sigma_z_ ? std::min(*sigma_z_, sp.min_z) : sp.min_z;
    }
  }
  t.zeta_q = zeta_q_;
  t.zeta_u = zeta_u_;
  t.zeta_z = zeta_z_;
  t.sigma_q = sigma_q_.value_or(0.0);
  t.sigma_u = sigma_u_.value_or(0.0);
  t.sigma_z = sigma_z_.value_or(0.0);

  if (oracle_usable_ &&
      state.round % static_cast<std::uint64_t>(oracle_.config().stride) == 0) {
    // Beyond this scale the oracle's absolute tolerances sit under the
    // round-off floor of the iterate itself; such a trajectory has diverged
    // even though the hard 1e12 guard has not tripped yet.
    constexpr double kEps = 2.220446049250313e-16;
    const double scale = std::max({norm(xbar), norm(state.mean_y()), norm(state.mean_v())});
    if (kEps * scale > 0.01 * oracle_.config().inner_tol)
      throw DivergenceError(state.round, DivergenceError::no_agent,
                            "iterate scale exceeds the oracle's resolvable range");
    try {
      const HypergradientResult hg = oracle_.evaluate(xbar);
      t.stationarity = hg.stationarity;
      min_stationarity_ = min_stationarity_ ? std::min(*min_stationarity_, hg.stationarity)
                                            : hg.stationarity;
      final_stationarity_ = hg.stationarity;
      if (supports_accuracy_) {
        const auto acc = problem_.validation_accuracy(hg.y_hat);
        if (acc) {
          t.test_accuracy = *acc;
          final_accuracy_ = *acc;
        } else {
          supports_accuracy_ = false;
        }
      }
    } catch (const OracleFailure&) {
      // The landscape at this iterate cannot be resolved to the configured
      // tolerances (runaway trajectories of untuned baselines). Stop
      // evaluating rather than burn the iteration cap every round; the
      // trace keeps stationarity absent from here on.
      oracle_usable_ = false;
    }
  }

  for (MetricSink* s : sinks_) s->write(t);
  last_trace_ = t;
  ++rounds_seen_;
}

void MetricsCollector::on_abort() {
  for (MetricSink* s : sinks_) s->flush();
}

void MetricsCollector::finish() {
  for (MetricSink* s : sinks_) s->flush();
}

}  // namespace adasdbo
