#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "adasdbo/data.hpp"
#include "adasdbo/linalg.hpp"

namespace adasdbo {

/// Bilevel problem oracle: each of n agents owns a local upper objective
/// f_i(x, y) and a strongly convex lower objective l_i(x, y), exposed
/// through the five derivative actions the algorithm consumes. All oracles
/// are pure functions of their arguments; dimension mismatches raise
/// std::invalid_argument.
class BilevelProblem {
 public:
  virtual ~BilevelProblem() = default;

  virtual std::size_t upper_dim() const = 0;
  virtual std::size_t lower_dim() const = 0;
  virtual std::size_t num_agents() const = 0;

  Vec grad_upper_x(std::size_t agent, const Vec& x, const Vec& y) const;
  Vec grad_upper_y(std::size_t agent, const Vec& x, const Vec& y) const;
  Vec grad_lower_y(std::size_t agent, const Vec& x, const Vec& y) const;
  /// Lower-level Hessian-vector product in y, without forming the Hessian.
  Vec hvp_lower_yy(std::size_t agent, const Vec& x, const Vec& y, const Vec& v) const;
  /// Mixed-partial Jacobian-vector product: d/dx (v . grad_lower_y).
  Vec jvp_lower_xy(std::size_t agent, const Vec& x, const Vec& y, const Vec& v) const;

  double upper_loss(std::size_t agent, const Vec& x, const Vec& y) const;
  double lower_loss(std::size_t agent, const Vec& x, const Vec& y) const;

  /// Lower bound on the lower-level strong convexity modulus at upper
  /// iterate x (used by the default projection-radius policy).
  virtual double strong_convexity_hint(const Vec& x) const = 0;

  /// Top-level validation accuracy of the lower-level model `w`, when the
  /// problem carries held-out data.
  virtual std::optional<double> validation_accuracy(const Vec& /*w*/) const {
    return std::nullopt;
  }

 protected:
  virtual void do_grad_upper_x(std::size_t, const Vec&, const Vec&, Vec&) const = 0;
  virtual void do_grad_upper_y(std::size_t, const Vec&, const Vec&, Vec&) const = 0;
  virtual void do_grad_lower_y(std::size_t, const Vec&, const Vec&, Vec&) const = 0;
  virtual void do_hvp_lower_yy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const = 0;
  virtual void do_jvp_lower_xy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const = 0;
  virtual double do_upper_loss(std::size_t, const Vec&, const Vec&) const = 0;
  virtual double do_lower_loss(std::size_t, const Vec&, const Vec&) const = 0;

 private:
  void check_args(std::size_t agent, const Vec& x, const Vec& y, const Vec* v) const;
};

/// Closed-form test instrument:
///   f_i(x,y) = 0.5 ||x - (a + ax_i)||^2 + 0.5 ||y - (b + by_i)||^2
///   l_i(x,y) = 0.5 ||y - C x - (b + bl_i)||^2
/// with per-agent offsets summing to zero, so the averaged problem has
///   y*(x) = C x + b   and   grad Phi(x) = (x - a) + C^T C x.
class QuadraticBilevel : public BilevelProblem {
 public:
  QuadraticBilevel(Vec a, Vec b, Vec coupling /* q x p row-major */,
                   std::vector<Vec> upper_x_offsets, std::vector<Vec> upper_y_offsets,
                   std::vector<Vec> lower_offsets);

  /// Seeded default instance with zero-mean heterogeneity offsets.
  static QuadraticBilevel make_default(std::size_t p, std::size_t q, std::size_t n,
                                       std::uint64_t seed, double target_scale = 0.1,
                                       double coupling_scale = 2.0, double offset_scale = 0.7);

  std::size_t upper_dim() const override { return a_.size(); }
  std::size_t lower_dim() const override { return b_.size(); }
  std::size_t num_agents() const override { return ax_.size(); }
  double strong_convexity_hint(const Vec&) const override { return 1.0; }

  /// Analytic hypergradient of the averaged problem, from the closed-form
  /// y*(x) substituted into the implicit-function expression.
  Vec true_hypergradient(const Vec& x) const;
  /// Analytic minimizer (I + C^T C) x = a.
  Vec minimizer() const;
  /// y*(x) of the averaged lower problem.
  Vec lower_solution(const Vec& x) const;

 protected:
  void do_grad_upper_x(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_grad_upper_y(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_grad_lower_y(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_hvp_lower_yy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const override;
  void do_jvp_lower_xy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const override;
  double do_upper_loss(std::size_t, const Vec&, const Vec&) const override;
  double do_lower_loss(std::size_t, const Vec&, const Vec&) const override;

 private:
  Vec a_, b_, c_;  // c_ is q x p row-major
  std::vector<Vec> ax_, ay_, bl_;
};

/// Hyperparameter optimization for regularized logistic fitting on
/// regression-style labels: upper variable lambda, lower variable w,
///   f_i(lambda, w) = sum_{val}  psi(y_e x_e^T w)
///   l_i(lambda, w) = sum_{train} psi(y_e x_e^T w) + 0.5 sum_j e^{lambda_j} w_j^2
/// with psi(u) = log(1 + e^-u). Objectives are plain sums over the local
/// samples; upper_dim == lower_dim == feature dim.
class SyntheticLogisticHPO : public BilevelProblem {
 public:
  explicit SyntheticLogisticHPO(std::vector<AgentData> agents);

  std::size_t upper_dim() const override { return dim_; }
  std::size_t lower_dim() const override { return dim_; }
  std::size_t num_agents() const override { return agents_.size(); }
  double strong_convexity_hint(const Vec& x) const override;
  std::optional<double> validation_accuracy(const Vec& w) const override;

  const AgentData& agent_data(std::size_t i) const { return agents_[i]; }

 protected:
  void do_grad_upper_x(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_grad_upper_y(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_grad_lower_y(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_hvp_lower_yy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const override;
  void do_jvp_lower_xy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const override;
  double do_upper_loss(std::size_t, const Vec&, const Vec&) const override;
  double do_lower_loss(std::size_t, const Vec&, const Vec&) const override;

 private:
  std::vector<AgentData> agents_;
  std::size_t dim_ = 0;
};

/// Hyperparameter optimization for softmax regression over image data:
/// upper variable lambda in R^p, lower variable w in R^{c x p} flattened
/// row-major (class-major),
///   f_i = (1/|val|)   sum CE(w x_e, y_e)
///   l_i = (1/|train|) sum CE(w x_e, y_e) + (1/(c p)) sum_{j,k} e^{lambda_k} w_{jk}^2.
class SoftmaxHPO : public BilevelProblem {
 public:
  SoftmaxHPO(std::vector<AgentData> agents, int classes, std::size_t feature_dim);

  std::size_t upper_dim() const override { return feature_dim_; }
  std::size_t lower_dim() const override { return feature_dim_ * classes_; }
  std::size_t num_agents() const override { return agents_.size(); }
  double strong_convexity_hint(const Vec& x) const override;
  std::optional<double> validation_accuracy(const Vec& w) const override;

  int classes() const { return classes_; }
  const AgentData& agent_data(std::size_t i) const { return agents_[i]; }

 protected:
  void do_grad_upper_x(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_grad_upper_y(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_grad_lower_y(std::size_t, const Vec&, const Vec&, Vec&) const override;
  void do_hvp_lower_yy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const override;
  void do_jvp_lower_xy(std::size_t, const Vec&, const Vec&, const Vec&, Vec&) const override;
  double do_upper_loss(std::size_t, const Vec&, const Vec&) const override;
  double do_lower_loss(std::size_t, const Vec&, const Vec&) const override;

 private:
  std::vector<AgentData> agents_;
  int classes_ = 0;
  std::size_t feature_dim_ = 0;
};

}  // namespace adasdbo
