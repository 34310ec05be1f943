#include "adasdbo/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "adasdbo/errors.hpp"

namespace adasdbo {

void OracleConfig::validate() const {
  if (!(inner_tol > 0.0 && inner_tol < 1.0) || !(cg_tol > 0.0 && cg_tol < 1.0))
    throw std::invalid_argument("oracle: tolerances must lie in (0,1)");
  if (max_inner_iters < 1 || max_cg_iters < 1)
    throw std::invalid_argument("oracle: iteration caps must be >= 1");
  if (stride < 1) throw std::invalid_argument("oracle: stride must be >= 1");
}

Oracle::Oracle(const BilevelProblem& problem, OracleConfig cfg)
    : problem_(problem), cfg_(cfg) {
  cfg_.validate();
}

double Oracle::avg_lower_loss(const Vec& x, const Vec& y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < problem_.num_agents(); ++i) s += problem_.lower_loss(i, x, y);
  return s / static_cast<double>(problem_.num_agents());
}

double Oracle::avg_upper_loss(const Vec& x, const Vec& y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < problem_.num_agents(); ++i) s += problem_.upper_loss(i, x, y);
  return s / static_cast<double>(problem_.num_agents());
}

Vec Oracle::avg_grad_lower_y(const Vec& x, const Vec& y) const {
  Vec g(problem_.lower_dim(), 0.0);
  for (std::size_t i = 0; i < problem_.num_agents(); ++i)
    axpy(1.0, problem_.grad_lower_y(i, x, y), g);
  scale(1.0 / static_cast<double>(problem_.num_agents()), g);
  return g;
}

Vec Oracle::avg_grad_upper_y(const Vec& x, const Vec& y) const {
  Vec g(problem_.lower_dim(), 0.0);
  for (std::size_t i = 0; i < problem_.num_agents(); ++i)
    axpy(1.0, problem_.grad_upper_y(i, x, y), g);
  scale(1.0 / static_cast<double>(problem_.num_agents()), g);
  return g;
}

Vec Oracle::avg_grad_upper_x(const Vec& x, const Vec& y) const {
  Vec g(problem_.upper_dim(), 0.0);
  for (std::size_t i = 0; i < problem_.num_agents(); ++i)
    axpy(1.0, problem_.grad_upper_x(i, x, y), g);
  scale(1.0 / static_cast<double>(problem_.num_agents()), g);
  return g;
}

Vec Oracle::avg_hvp_lower_yy(const Vec& x, const Vec& y, const Vec& v) const {
  Vec g(problem_.lower_dim(), 0.0);
  for (std::size_t i = 0; i < problem_.num_agents(); ++i)
    axpy(1.0, problem_.hvp_lower_yy(i, x, y, v), g);
  scale(1.0 / static_cast<double>(problem_.num_agents()), g);
  return g;
}

Vec Oracle::avg_jvp_lower_xy(const Vec& x, const Vec& y, const Vec& v) const {
  Vec g(problem_.upper_dim(), 0.0);
  for (std::size_t i = 0; i < problem_.num_agents(); ++i)
    axpy(1.0, problem_.jvp_lower_xy(i, x, y, v), g);
  scale(1.0 / static_cast<double>(problem_.num_agents()), g);
  return g;
}

Vec Oracle::solve_lower(const Vec& xbar) {
  if (xbar.size() != problem_.upper_dim())
    throw std::invalid_argument("solve_lower: bad x dimension");

  Vec y = warm_y_ && warm_y_->size() == problem_.lower_dim() ? *warm_y_
                                                             : Vec(problem_.lower_dim(), 0.0);
  double obj = avg_lower_loss(xbar, y);
  if (!std::isfinite(obj)) {
    // A stale warm start can sit outside the evaluable region; restart cold.
    y.assign(problem_.lower_dim(), 0.0);
    obj = avg_lower_loss(xbar, y);
  }

  double t = 1.0;
  constexpr double kArmijo = 1e-4;
  constexpr double kEps = 2.220446049250313e-16;
  Vec prev_y, prev_g;
  for (int it = 0; it < cfg_.max_inner_iters; ++it) {
    const Vec g = avg_grad_lower_y(xbar, y);
    const double gnorm_sq = norm_sq(g);
    if (std::sqrt(gnorm_sq) <= cfg_.inner_tol) {
      warm_y_ = y;
      return y;
    }
    // Barzilai-Borwein seed for the backtracking search: s^T s / s^T dg
    // adapts the step to the local curvature, which plain 1/L carry-over
    // cannot follow on stiff instances.
    if (!prev_y.empty()) {
      double ss = 0.0, sg = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const double s = y[k] - prev_y[k];
        ss += s * s;
        sg += s * (g[k] - prev_g[k]);
      }
      if (sg > 0.0 && ss > 0.0) t = std::min(std::max(ss / sg, 1e-12), 1e8);
    }
    prev_y = y;
    prev_g = g;

    // The acceptance test allows round-off noise of the objective so the
    // solve can push the gradient far below the decrease certifiable in
    // double precision.
    bool accepted = false;
    for (int ls = 0; ls < 200; ++ls) {
      Vec trial = y;
      axpy(-t, g, trial);
      const double trial_obj = avg_lower_loss(xbar, trial);
      const double noise = 8.0 * kEps * (std::abs(obj) + std::abs(trial_obj));
      if (std::isfinite(trial_obj) && trial_obj <= obj - kArmijo * t * gnorm_sq + noise) {
        y = std::move(trial);
        obj = trial_obj;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw OracleFailure("solve_lower: line search exhausted", std::sqrt(gnorm_sq));
  }
  throw OracleFailure("solve_lower: iteration cap " + std::to_string(cfg_.max_inner_iters) +
                          " exceeded",
                      norm(avg_grad_lower_y(xbar, y)));
}

Vec Oracle::solve_linear_system(const Vec& xbar, const Vec& y_hat) {
  if (xbar.size() != problem_.upper_dim() || y_hat.size() != problem_.lower_dim())
    throw std::invalid_argument("solve_linear_system: bad dimensions");

  const Vec rhs = avg_grad_upper_y(xbar, y_hat);
  if (norm(rhs) == 0.0) {
    warm_v_ = Vec(problem_.lower_dim(), 0.0);
    return *warm_v_;
  }

  Vec v = warm_v_ && warm_v_->size() == problem_.lower_dim() ? *warm_v_
                                                             : Vec(problem_.lower_dim(), 0.0);
  if (!all_finite(v)) v.assign(problem_.lower_dim(), 0.0);

  // CG on H v = rhs using Hessian-vector products only.
  Vec r = rhs;
  const Vec hv0 = avg_hvp_lower_yy(xbar, y_hat, v);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] -= hv0[k];
  Vec p = r;
  double rs = norm_sq(r);
  if (std::sqrt(rs) <= cfg_.cg_tol) return v;

  for (int it = 0; it < cfg_.max_cg_iters; ++it) {
    const Vec hp = avg_hvp_lower_yy(xbar, y_hat, p);
    const double php = dot(p, hp);
    if (!(php > 0.0))
      throw OracleFailure("solve_linear_system: non-positive curvature " + std::to_string(php),
                          std::sqrt(rs));
    const double alpha = rs / php;
    axpy(alpha, p, v);
    axpy(-alpha, hp, r);
    const double rs_next = norm_sq(r);
    if (std::sqrt(rs_next) <= cfg_.cg_tol) {
      // Post-hoc residual contract on the returned iterate.
      Vec check = avg_hvp_lower_yy(xbar, y_hat, v);
      for (std::size_t k = 0; k < check.size(); ++k) check[k] -= rhs[k];
      const double res = norm(check);
      if (res > 10.0 * cfg_.cg_tol)
        throw OracleFailure("solve_linear_system: recurrence residual drifted", res);
      warm_v_ = v;
      return v;
    }
    const double beta = rs_next / rs;
    rs = rs_next;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = r[k] + beta * p[k];
  }
  throw OracleFailure("solve_linear_system: iteration cap " + std::to_string(cfg_.max_cg_iters) +
                          " exceeded",
                      std::sqrt(rs));
}

HypergradientResult Oracle::evaluate(const Vec& xbar) {
  HypergradientResult out;
  out.y_hat = solve_lower(xbar);
  out.v_hat = solve_linear_system(xbar, out.y_hat);
  out.grad = avg_grad_upper_x(xbar, out.y_hat);
  const Vec cross = avg_jvp_lower_xy(xbar, out.y_hat, out.v_hat);
  for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] -= cross[k];
  out.stationarity = norm_sq(out.grad);
  return out;
}

Vec Oracle::true_hypergradient(const Vec& xbar) { return evaluate(xbar).grad; }

double Oracle::stationarity(const Vec& xbar) { return evaluate(xbar).stationarity; }

}  // namespace adasdbo
