#include "adasdbo/algorithm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "adasdbo/errors.hpp"
#include "adasdbo/rng.hpp"

namespace adasdbo {

namespace {

constexpr double kBlowupNorm = 1e12;

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes
// disjoint slots, so the schedule cannot affect results.
template <class Fn>
void parallel_for_agents(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct RoundGradients {
  std::vector<Vec> gx, gy, gv;
  Vec hx, hy, hv;  // squared norms per agent
};

// The three per-agent gradients of a round, all evaluated at the
// round-start state (no intra-round staleness).
RoundGradients compute_gradients(const SwarmState& s, const BilevelProblem& problem,
                                 int threads) {
  const std::size_t n = s.agents.size();
  RoundGradients g;
  g.gx.resize(n);
  g.gy.resize(n);
  g.gv.resize(n);
  g.hx.resize(n);
  g.hy.resize(n);
  g.hv.resize(n);
  parallel_for_agents(n, threads, [&](std::size_t i) {
    const AgentState& a = s.agents[i];
    g.gy[i] = problem.grad_lower_y(i, a.x, a.y);

    Vec gv = problem.hvp_lower_yy(i, a.x, a.y, a.v);
    const Vec guy = problem.grad_upper_y(i, a.x, a.y);
    for (std::size_t k = 0; k < gv.size(); ++k) gv[k] -= guy[k];
    g.gv[i] = std::move(gv);

    Vec gx = problem.grad_upper_x(i, a.x, a.y);
    const Vec jv = problem.jvp_lower_xy(i, a.x, a.y, a.v);
    for (std::size_t k = 0; k < gx.size(); ++k) gx[k] -= jv[k];
    g.gx[i] = std::move(gx);

    if (!all_finite(g.gx[i]) || !all_finite(g.gy[i]) || !all_finite(g.gv[i]))
      throw DivergenceError(s.round, i, "non-finite gradient");
    g.hx[i] = norm_sq(g.gx[i]);
    g.hy[i] = norm_sq(g.gy[i]);
    g.hv[i] = norm_sq(g.gv[i]);
  });
  return g;
}

void check_shapes(const SwarmState& s, const BilevelProblem& problem, const MixingMatrix& W) {
  if (s.agents.size() != problem.num_agents() || s.agents.size() != W.size())
    throw std::invalid_argument("step: swarm/problem/matrix disagree on agent count");
  for (const AgentState& a : s.agents)
    if (a.x.size() != problem.upper_dim() || a.y.size() != problem.lower_dim() ||
        a.v.size() != problem.lower_dim())
      throw std::invalid_argument("step: agent iterate dimensions mismatch");
}

void project_ball(Vec& v, double radius) {
  const double nv = norm(v);
  if (nv > radius) scale(radius / nv, v);
}

void post_step_check(const SwarmState& s, std::uint64_t round) {
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentState& a = s.agents[i];
    if (!all_finite(a.x) || !all_finite(a.y) || !all_finite(a.v) ||
        !std::isfinite(a.acc_x_sq) || !std::isfinite(a.acc_y_sq) || !std::isfinite(a.acc_v_sq))
      throw DivergenceError(round, i, "non-finite iterate after update");
    if (norm(a.x) > kBlowupNorm)
      throw DivergenceError(round, i, "primal norm exceeded 1e12");
  }
}

// term_a = mean(1/q) * mean gradient, term_b = mean((1/q_i - mean(1/q)) g_i),
// with 1/q averaged over agents so the discrepancy coefficients are zero-mean.
void fill_primal_decomposition(const std::vector<Vec>& gx, const Vec& q_inv,
                               StepDiagnostics& diag) {
  const std::size_t n = gx.size(), p = gx.front().size();
  double q_inv_mean = 0.0;
  for (double qi : q_inv) q_inv_mean += qi;
  q_inv_mean /= static_cast<double>(n);

  diag.term_a.assign(p, 0.0);
  diag.term_b.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    axpy(1.0, gx[i], diag.term_a);
    axpy(q_inv[i] - q_inv_mean, gx[i], diag.term_b);
  }
  scale(q_inv_mean / static_cast<double>(n), diag.term_a);
  scale(1.0 / static_cast<double>(n), diag.term_b);
}

}  // namespace

Vec SwarmState::mean_x() const {
  Vec m(agents.front().x.size(), 0.0);
  for (const AgentState& a : agents) axpy(1.0, a.x, m);
  scale(1.0 / static_cast<double>(agents.size()), m);
  return m;
}

Vec SwarmState::mean_y() const {
  Vec m(agents.front().y.size(), 0.0);
  for (const AgentState& a : agents) axpy(1.0, a.y, m);
  scale(1.0 / static_cast<double>(agents.size()), m);
  return m;
}

Vec SwarmState::mean_v() const {
  Vec m(agents.front().v.size(), 0.0);
  for (const AgentState& a : agents) axpy(1.0, a.v, m);
  scale(1.0 / static_cast<double>(agents.size()), m);
  return m;
}

void AdaSdboConfig::validate() const {
  if (!(gamma_x > 0.0 && gamma_y > 0.0 && gamma_v > 0.0))
    throw std::invalid_argument("config: control coefficients must be positive");
  if (!(m0 > 0.0)) throw std::invalid_argument("config: m0 must be positive");
  if (projection_radius && !(*projection_radius > 0.0))
    throw std::invalid_argument("config: projection radius must be positive");
}

void ConstConfig::validate() const {
  if (!(eta_x > 0.0 && eta_y > 0.0 && eta_v > 0.0))
    throw std::invalid_argument("config: stepsizes must be positive");
  if (projection_radius && !(*projection_radius > 0.0))
    throw std::invalid_argument("config: projection radius must be positive");
}

InitSpec InitSpec::zeros(std::size_t p, std::size_t q) {
  return identical(Vec(p, 0.0), Vec(q, 0.0), Vec(q, 0.0));
}

InitSpec InitSpec::identical(Vec x0, Vec y0, Vec v0) {
  InitSpec s;
  s.x.push_back(std::move(x0));
  s.y.push_back(std::move(y0));
  s.v.push_back(std::move(v0));
  return s;
}

SwarmState make_swarm(const BilevelProblem& problem, double m0, const InitSpec& init) {
  const std::size_t n = problem.num_agents();
  auto pick = [&](const std::vector<Vec>& src, std::size_t i, std::size_t dim,
                  const char* name) -> const Vec& {
    if (src.size() != 1 && src.size() != n)
      throw std::invalid_argument(std::string("init: ") + name + " needs 1 or n entries");
    const Vec& v = src.size() == 1 ? src.front() : src[i];
    if (v.size() != dim)
      throw std::invalid_argument(std::string("init: ") + name + " has wrong dimension");
    return v;
  };
  if (!(m0 > 0.0)) throw std::invalid_argument("make_swarm: m0 must be positive");
  SwarmState s;
  s.agents.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentState& a = s.agents[i];
    a.x = pick(init.x, i, problem.upper_dim(), "x");
    a.y = pick(init.y, i, problem.lower_dim(), "y");
    a.v = pick(init.v, i, problem.lower_dim(), "v");
    a.acc_x_sq = a.acc_y_sq = a.acc_v_sq = m0 * m0;
  }
  return s;
}

SwarmState step(const SwarmState& swarm, const BilevelProblem& problem, const MixingMatrix& W,
                const AdaSdboConfig& cfg, StepDiagnostics* diag, int threads) {
  cfg.validate();
  check_shapes(swarm, problem, W);
  const std::size_t n = swarm.agents.size();

  const RoundGradients g = compute_gradients(swarm, problem, threads);

  // Local accumulation and updates; mixing sees the post-update values.
  std::vector<Vec> xs(n), ys(n), vs(n);
  Vec acc_x(n), acc_y(n), acc_v(n), q_inv(n);
  Vec m_x(n), m_y(n), m_v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentState& a = swarm.agents[i];
    acc_x[i] = a.acc_x_sq + g.hx[i];
    acc_y[i] = a.acc_y_sq + g.hy[i];
    acc_v[i] = a.acc_v_sq + g.hv[i];
    m_x[i] = std::sqrt(acc_x[i]);
    m_y[i] = std::sqrt(acc_y[i]);
    m_v[i] = std::sqrt(acc_v[i]);
    const double z = std::max(m_v[i], m_y[i]);
    q_inv[i] = 1.0 / (m_x[i] * z);

    ys[i] = a.y;
    axpy(-cfg.gamma_y / m_y[i], g.gy[i], ys[i]);
    vs[i] = a.v;
    axpy(-cfg.gamma_v / z, g.gv[i], vs[i]);
    xs[i] = a.x;
    axpy(-cfg.gamma_x * q_inv[i], g.gx[i], xs[i]);
  }

  if (diag) {
    fill_primal_decomposition(g.gx, q_inv, *diag);
    diag->sum_h_x = diag->sum_h_y = diag->sum_h_v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag->sum_h_x += g.hx[i];
      diag->sum_h_y += g.hy[i];
      diag->sum_h_v += g.hv[i];
    }
    diag->m_x_post = m_x;
    diag->m_y_post = m_y;
    diag->m_v_post = m_v;
    diag->accumulators_active = true;
    diag->accumulators_mean_conserving = cfg.mix_accumulators == AccumulatorMixing::squared;
  }

  xs = W.mix(xs);
  ys = W.mix(ys);
  vs = W.mix(vs);
  if (cfg.mix_accumulators == AccumulatorMixing::squared) {
    acc_x = W.mix(acc_x);
    acc_y = W.mix(acc_y);
    acc_v = W.mix(acc_v);
  } else {
    Vec mx = W.mix(m_x), my = W.mix(m_y), mv = W.mix(m_v);
    for (std::size_t i = 0; i < n; ++i) {
      acc_x[i] = mx[i] * mx[i];
      acc_y[i] = my[i] * my[i];
      acc_v[i] = mv[i] * mv[i];
    }
  }

  SwarmState next;
  next.round = swarm.round + 1;
  next.agents.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentState& a = next.agents[i];
    a.x = std::move(xs[i]);
    a.y = std::move(ys[i]);
    a.v = std::move(vs[i]);
    if (cfg.projection_radius) project_ball(a.v, *cfg.projection_radius);
    a.acc_x_sq = acc_x[i];
    a.acc_y_sq = acc_y[i];
    a.acc_v_sq = acc_v[i];
  }
  post_step_check(next, swarm.round);
  return next;
}

SwarmState const_step(const SwarmState& swarm, const BilevelProblem& problem,
                      const MixingMatrix& W, const ConstConfig& cfg, StepDiagnostics* diag,
                      int threads) {
  cfg.validate();
  check_shapes(swarm, problem, W);
  const std::size_t n = swarm.agents.size();

  const RoundGradients g = compute_gradients(swarm, problem, threads);

  std::vector<Vec> xs(n), ys(n), vs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentState& a = swarm.agents[i];
    ys[i] = a.y;
    axpy(-cfg.eta_y, g.gy[i], ys[i]);
    vs[i] = a.v;
    axpy(-cfg.eta_v, g.gv[i], vs[i]);
    xs[i] = a.x;
    axpy(-cfg.eta_x, g.gx[i], xs[i]);
  }

  if (diag) {
    // Fixed stepsizes have no discrepancy term; the mean displacement is
    // -eta_x * term_a exactly.
    Vec unit_inv(n, 1.0);
    fill_primal_decomposition(g.gx, unit_inv, *diag);
    diag->sum_h_x = diag->sum_h_y = diag->sum_h_v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag->sum_h_x += g.hx[i];
      diag->sum_h_y += g.hy[i];
      diag->sum_h_v += g.hv[i];
    }
    diag->m_x_post.clear();
    diag->m_y_post.clear();
    diag->m_v_post.clear();
    diag->accumulators_active = false;
  }

  xs = W.mix(xs);
  ys = W.mix(ys);
  vs = W.mix(vs);

  SwarmState next;
  next.round = swarm.round + 1;
  next.agents.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentState& a = next.agents[i];
    a.x = std::move(xs[i]);
    a.y = std::move(ys[i]);
    a.v = std::move(vs[i]);
    if (cfg.projection_radius) project_ball(a.v, *cfg.projection_radius);
    a.acc_x_sq = swarm.agents[i].acc_x_sq;
    a.acc_y_sq = swarm.agents[i].acc_y_sq;
    a.acc_v_sq = swarm.agents[i].acc_v_sq;
  }
  post_step_check(next, swarm.round);
  return next;
}

std::pair<Vec, Vec> mean_update_decomposition(const BilevelProblem& problem,
                                              const SwarmState& before, const SwarmState& after,
                                              const MixingMatrix& W, const AdaSdboConfig& cfg) {
  if (after.round != before.round + 1)
    throw std::invalid_argument("mean_update_decomposition: states are not consecutive rounds");
  StepDiagnostics diag;
  const SwarmState replay = step(before, problem, W, cfg, &diag);
  for (std::size_t i = 0; i < replay.agents.size(); ++i) {
    const Vec d = sub(replay.agents[i].x, after.agents[i].x);
    const double ref = std::max(norm(after.agents[i].x), 1.0);
    if (norm(d) > 1e-9 * ref)
      throw std::invalid_argument(
          "mean_update_decomposition: `after` does not follow from `before`");
  }
  return {diag.term_a, diag.term_b};
}

namespace {

template <class StepFn>
RunResult run_loop(const BilevelProblem& problem, std::uint64_t rounds, const InitSpec& init,
                   double m0, RoundObserver* observer, StepFn&& do_step) {
  const auto t0 = std::chrono::steady_clock::now();
  SwarmState s = make_swarm(problem, m0, init);
  RunResult result;
  try {
    for (std::uint64_t t = 0; t < rounds; ++t) {
      StepDiagnostics diag;
      SwarmState next = do_step(s, observer ? &diag : nullptr);
      if (observer) observer->on_round(s, diag);
      s = std::move(next);
      result.rounds_completed = t + 1;
    }
  } catch (...) {
    if (observer) observer->on_abort();
    throw;
  }
  result.final_state = std::move(s);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (observer) {
    result.min_stationarity = observer->min_stationarity();
    result.final_stationarity = observer->final_stationarity();
  }
  return result;
}

}  // namespace

RunResult run_adasdbo(const BilevelProblem& problem, const MixingMatrix& W,
                      const AdaSdboConfig& cfg, const InitSpec& init, RoundObserver* observer,
                      int threads) {
  cfg.validate();
  return run_loop(problem, cfg.rounds, init, cfg.m0, observer,
                  [&](const SwarmState& s, StepDiagnostics* d) {
                    return step(s, problem, W, cfg, d, threads);
                  });
}

RunResult run_const(const BilevelProblem& problem, const MixingMatrix& W, const ConstConfig& cfg,
                    const InitSpec& init, RoundObserver* observer, int threads) {
  cfg.validate();
  return run_loop(problem, cfg.rounds, init, /*m0=*/1.0, observer,
                  [&](const SwarmState& s, StepDiagnostics* d) {
                    return const_step(s, problem, W, cfg, d, threads);
                  });
}

std::optional<double> default_projection_radius(const BilevelProblem& problem,
                                                const InitSpec& init) {
  const SwarmState s = make_swarm(problem, 1.0, init);
  const Vec& x0 = s.agents.front().x;
  const Vec& y0 = s.agents.front().y;

  // Sample ||grad_y f_i|| at the initial point and a few perturbations of it
  // to estimate the bound entering ||v*|| <= C_fy / mu.
  double c_fy = 0.0;
  for (std::size_t i = 0; i < problem.num_agents(); ++i)
    c_fy = std::max(c_fy, norm(problem.grad_upper_y(i, x0, y0)));
  Rng rng(0x70726f6au, "projection-radius");
  for (int probe = 0; probe < 8; ++probe) {
    Vec xp = x0, yp = y0;
    for (double& t : xp) t += rng.normal();
    for (double& t : yp) t += rng.normal();
    for (std::size_t i = 0; i < problem.num_agents(); ++i)
      c_fy = std::max(c_fy, norm(problem.grad_upper_y(i, xp, yp)));
  }

  const double mu = problem.strong_convexity_hint(x0);
  if (!(mu > 0.0) || c_fy == 0.0) return std::nullopt;
  return 10.0 * c_fy / mu;
}

}  // namespace adasdbo
