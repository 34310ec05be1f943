#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "adasdbo/linalg.hpp"
#include "adasdbo/network.hpp"
#include "adasdbo/problems.hpp"

namespace adasdbo {

/// One agent's iterates plus its three tracked squared gradient-norm
/// accumulators. Accumulators stay strictly positive: they start at m0^2,
/// local accumulation only adds, and gossip convex-combines positives.
struct AgentState {
  Vec x, y, v;
  double acc_x_sq = 0.0, acc_y_sq = 0.0, acc_v_sq = 0.0;
};

struct SwarmState {
  std::vector<AgentState> agents;
  std::uint64_t round = 0;

  Vec mean_x() const;
  Vec mean_y() const;
  Vec mean_v() const;
};

/// How gradient-norm accumulators are gossiped: `squared` mixes the
/// accumulators themselves (mean-conserving tracking recursion), `linear`
/// mixes their square roots (ablation).
enum class AccumulatorMixing { squared, linear };

struct AdaSdboConfig {
  double gamma_x = 1.0, gamma_y = 1.0, gamma_v = 1.0;
  double m0 = 10.0;
  std::optional<double> projection_radius;  // nullopt = unbounded
  std::uint64_t rounds = 1000;
  AccumulatorMixing mix_accumulators = AccumulatorMixing::squared;

  void validate() const;
};

struct ConstConfig {
  double eta_x = 0.01, eta_y = 0.02, eta_v = 0.01;
  std::optional<double> projection_radius;
  std::uint64_t rounds = 1000;

  void validate() const;
};

/// Initial iterates: one entry = identical across agents, n entries =
/// per-agent.
struct InitSpec {
  std::vector<Vec> x, y, v;

  static InitSpec zeros(std::size_t p, std::size_t q);
  static InitSpec identical(Vec x0, Vec y0, Vec v0);
};

SwarmState make_swarm(const BilevelProblem& problem, double m0, const InitSpec& init);

/// Per-round byproducts: the averaged-update split of the primal step into
/// the mean-stepsize term and the stepsize-discrepancy term (the observed
/// mean displacement equals -gamma_x * (term_a + term_b)), the summed
/// squared gradient norms feeding the tracking recursion, and the local
/// post-accumulation m-values the updates actually used.
struct StepDiagnostics {
  Vec term_a, term_b;
  double sum_h_x = 0.0, sum_h_y = 0.0, sum_h_v = 0.0;
  Vec m_x_post, m_y_post, m_v_post;
  bool accumulators_active = false;
  // True when squared accumulators are gossiped, so their network mean obeys
  // the conservation identity; the linear ablation breaks it.
  bool accumulators_mean_conserving = false;
};

/// One full AdaSDBO round: local gradients at the round-start state, squared
/// norm accumulation, hierarchical stepsized updates, gossip of variables
/// and accumulators, projection of v. Throws DivergenceError on non-finite
/// gradients/iterates or a primal norm beyond 1e12.
SwarmState step(const SwarmState& swarm, const BilevelProblem& problem, const MixingMatrix& W,
                const AdaSdboConfig& cfg, StepDiagnostics* diag = nullptr, int threads = 1);

/// Constant-stepsize baseline round: same gradients and round structure, no
/// accumulators, gossip of variables only, projection of v.
SwarmState const_step(const SwarmState& swarm, const BilevelProblem& problem,
                      const MixingMatrix& W, const ConstConfig& cfg,
                      StepDiagnostics* diag = nullptr, int threads = 1);

/// Recomputes the averaged-update decomposition between two consecutive
/// states. Throws std::invalid_argument if `after` is not the successor of
/// `before` under this problem/W/cfg.
std::pair<Vec, Vec> mean_update_decomposition(const BilevelProblem& problem,
                                              const SwarmState& before, const SwarmState& after,
                                              const MixingMatrix& W, const AdaSdboConfig& cfg);

struct RunResult {
  SwarmState final_state;
  std::uint64_t rounds_completed = 0;
  double wall_seconds = 0.0;
  std::optional<double> min_stationarity;
  std::optional<double> final_stationarity;
};

/// Receives the round-start state and the diagnostics of the step taken
/// from it, once per executed round.
class RoundObserver {
 public:
  virtual ~RoundObserver() = default;
  virtual void on_round(const SwarmState& state, const StepDiagnostics& diag) = 0;
  /// Called when the run stops early so buffered output can be flushed.
  virtual void on_abort() {}
  virtual std::optional<double> min_stationarity() const { return std::nullopt; }
  virtual std::optional<double> final_stationarity() const { return std::nullopt; }
};

RunResult run_adasdbo(const BilevelProblem& problem, const MixingMatrix& W,
                      const AdaSdboConfig& cfg, const InitSpec& init,
                      RoundObserver* observer = nullptr, int threads = 1);

RunResult run_const(const BilevelProblem& problem, const MixingMatrix& W, const ConstConfig& cfg,
                    const InitSpec& init, RoundObserver* observer = nullptr, int threads = 1);

/// Default projection-radius policy: 10 x (sampled bound on ||grad_y f||) /
/// (strong-convexity hint at the initial upper iterate). Returns nullopt
/// (unbounded) when the estimate degenerates to zero.
std::optional<double> default_projection_radius(const BilevelProblem& problem,
                                                const InitSpec& init);

}  // namespace adasdbo
