#pragma once

#include <optional>

#include "adasdbo/linalg.hpp"
#include "adasdbo/problems.hpp"

namespace adasdbo {

struct OracleConfig {
  double inner_tol = 1e-9;   // gradient-norm stop for the lower solve
  double cg_tol = 1e-10;     // residual stop for the linear solve
  int max_inner_iters = 10000;
  int max_cg_iters = 2000;
  int stride = 1;            // rounds between stationarity evaluations

  void validate() const;
};

struct HypergradientResult {
  Vec y_hat;            // lower-level solution at xbar
  Vec v_hat;            // inverse-Hessian-vector solution
  Vec grad;             // hypergradient of the averaged objective
  double stationarity;  // squared norm of grad
};

/// High-accuracy reference computations on the averaged problem: lower-level
/// solve by gradient descent with backtracking, inverse-Hessian-vector solve
/// by conjugate gradients on Hessian-vector products only, and the implicit
/// hypergradient assembled from the two. Solutions are cached between calls
/// and used to warm-start the next evaluation along a trajectory.
class Oracle {
 public:
  explicit Oracle(const BilevelProblem& problem, OracleConfig cfg = {});

  Vec solve_lower(const Vec& xbar);
  Vec solve_linear_system(const Vec& xbar, const Vec& y_hat);
  Vec true_hypergradient(const Vec& xbar);
  double stationarity(const Vec& xbar);
  HypergradientResult evaluate(const Vec& xbar);

  const OracleConfig& config() const { return cfg_; }

  // Averaged oracles (fixed agent-order reductions), exposed for tests.
  double avg_lower_loss(const Vec& x, const Vec& y) const;
  double avg_upper_loss(const Vec& x, const Vec& y) const;
  Vec avg_grad_lower_y(const Vec& x, const Vec& y) const;
  Vec avg_grad_upper_y(const Vec& x, const Vec& y) const;
  Vec avg_grad_upper_x(const Vec& x, const Vec& y) const;
  Vec avg_hvp_lower_yy(const Vec& x, const Vec& y, const Vec& v) const;
  Vec avg_jvp_lower_xy(const Vec& x, const Vec& y, const Vec& v) const;

 private:
  const BilevelProblem& problem_;
  OracleConfig cfg_;
  std::optional<Vec> warm_y_;
  std::optional<Vec> warm_v_;
};

}  // namespace adasdbo
