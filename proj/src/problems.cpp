#include "adasdbo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "adasdbo/rng.hpp"

namespace adasdbo {

namespace {

// psi(u) = log(1 + e^-u), evaluated without overflow on either tail.
double softplus_neg(double u) {
  return u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
}

// psi'(u) = -1 / (1 + e^u) = -sigmoid(-u)
double softplus_neg_d1(double u) {
  if (u > 0.0) {
    const double e = std::exp(-u);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(u));
}

// psi''(u) = sigmoid(u) * (1 - sigmoid(u))
double softplus_neg_d2(double u) {
  const double e = std::exp(-std::abs(u));
  const double s = e / (1.0 + e);
  return s * (1.0 - s);
}

}  // namespace

void BilevelProblem::check_args(std::size_t agent, const Vec& x, const Vec& y,
                                const Vec* v) const {
  if (agent >= num_agents())
    throw std::invalid_argument("agent index " + std::to_string(agent) + " out of range");
  if (x.size() != upper_dim())
    throw std::invalid_argument("x has dimension " + std::to_string(x.size()) + ", expected " +
                                std::to_string(upper_dim()));
  if (y.size() != lower_dim())
    throw std::invalid_argument("y has dimension " + std::to_string(y.size()) + ", expected " +
                                std::to_string(lower_dim()));
  if (v && v->size() != lower_dim())
    throw std::invalid_argument("v has dimension " + std::to_string(v->size()) + ", expected " +
                                std::to_string(lower_dim()));
}

Vec BilevelProblem::grad_upper_x(std::size_t agent, const Vec& x, const Vec& y) const {
  check_args(agent, x, y, nullptr);
  Vec out;
  do_grad_upper_x(agent, x, y, out);
  return out;
}

Vec BilevelProblem::grad_upper_y(std::size_t agent, const Vec& x, const Vec& y) const {
  check_args(agent, x, y, nullptr);
  Vec out;
  do_grad_upper_y(agent, x, y, out);
  return out;
}

Vec BilevelProblem::grad_lower_y(std::size_t agent, const Vec& x, const Vec& y) const {
  check_args(agent, x, y, nullptr);
  Vec out;
  do_grad_lower_y(agent, x, y, out);
  return out;
}

Vec BilevelProblem::hvp_lower_yy(std::size_t agent, const Vec& x, const Vec& y,
                                 const Vec& v) const {
  check_args(agent, x, y, &v);
  Vec out;
  do_hvp_lower_yy(agent, x, y, v, out);
  return out;
}

Vec BilevelProblem::jvp_lower_xy(std::size_t agent, const Vec& x, const Vec& y,
                                 const Vec& v) const {
  check_args(agent, x, y, &v);
  Vec out;
  do_jvp_lower_xy(agent, x, y, v, out);
  return out;
}

double BilevelProblem::upper_loss(std::size_t agent, const Vec& x, const Vec& y) const {
  check_args(agent, x, y, nullptr);
  return do_upper_loss(agent, x, y);
}

double BilevelProblem::lower_loss(std::size_t agent, const Vec& x, const Vec& y) const {
  check_args(agent, x, y, nullptr);
  return do_lower_loss(agent, x, y);
}

// ---------------------------------------------------------------------------
// QuadraticBilevel

QuadraticBilevel::QuadraticBilevel(Vec a, Vec b, Vec coupling, std::vector<Vec> upper_x_offsets,
                                   std::vector<Vec> upper_y_offsets, std::vector<Vec> lower_offsets)
    : a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(coupling)),
      ax_(std::move(upper_x_offsets)),
      ay_(std::move(upper_y_offsets)),
      bl_(std::move(lower_offsets)) {
  const std::size_t p = a_.size(), q = b_.size();
  if (c_.size() != p * q) throw std::invalid_argument("quadratic: coupling must be q x p");
  if (ax_.empty() || ax_.size() != ay_.size() || ax_.size() != bl_.size())
    throw std::invalid_argument("quadratic: offset lists must share a positive length");
  for (std::size_t i = 0; i < ax_.size(); ++i)
    if (ax_[i].size() != p || ay_[i].size() != q || bl_[i].size() != q)
      throw std::invalid_argument("quadratic: offset dimensions mismatch");
}

QuadraticBilevel QuadraticBilevel::make_default(std::size_t p, std::size_t q, std::size_t n,
                                                std::uint64_t seed, double target_scale,
                                                double coupling_scale, double offset_scale) {
  Rng rng(seed, "quadratic-default");
  Vec a(p), b(q), c(q * p, 0.0);
  for (double& v : a) v = target_scale * rng.normal();
  for (double& v : b) v = target_scale * rng.normal();
  // Near-isometric coupling: dominant diagonal plus a small perturbation,
  // keeping every singular value close to coupling_scale.
  for (std::size_t r = 0; r < q; ++r)
    for (std::size_t col = 0; col < p; ++col)
      c[r * p + col] = (r == col ? coupling_scale : 0.0) + 0.1 * rng.normal();

  auto zero_mean_offsets = [&](std::size_t dim) {
    std::vector<Vec> offs(n, Vec(dim, 0.0));
    for (std::size_t k = 0; k < dim; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        offs[i][k] = offset_scale * rng.normal();
        mean += offs[i][k];
      }
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) offs[i][k] -= mean;
    }
    return offs;
  };

  return QuadraticBilevel(std::move(a), std::move(b), std::move(c), zero_mean_offsets(p),
                          zero_mean_offsets(q), zero_mean_offsets(q));
}

void QuadraticBilevel::do_grad_upper_x(std::size_t i, const Vec& x, const Vec&, Vec& out) const {
  out.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - (a_[k] + ax_[i][k]);
}

void QuadraticBilevel::do_grad_upper_y(std::size_t i, const Vec&, const Vec& y, Vec& out) const {
  out.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k] - (b_[k] + ay_[i][k]);
}

void QuadraticBilevel::do_grad_lower_y(std::size_t i, const Vec& x, const Vec& y, Vec& out) const {
  matvec(b_.size(), a_.size(), c_, x, out);  // out = C x
  for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k] - out[k] - (b_[k] + bl_[i][k]);
}

void QuadraticBilevel::do_hvp_lower_yy(std::size_t, const Vec&, const Vec&, const Vec& v,
                                       Vec& out) const {
  out = v;  // Hessian is the identity
}

void QuadraticBilevel::do_jvp_lower_xy(std::size_t, const Vec&, const Vec&, const Vec& v,
                                       Vec& out) const {
  matvec_t(b_.size(), a_.size(), c_, v, out);  // C^T v
  scale(-1.0, out);                            // d/dx (v . grad_lower_y) = -C^T v
}

double QuadraticBilevel::do_upper_loss(std::size_t i, const Vec& x, const Vec& y) const {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - (a_[k] + ax_[i][k]);
    s += d * d;
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double d = y[k] - (b_[k] + ay_[i][k]);
    s += d * d;
  }
  return 0.5 * s;
}

double QuadraticBilevel::do_lower_loss(std::size_t i, const Vec& x, const Vec& y) const {
  Vec cx;
  matvec(b_.size(), a_.size(), c_, x, cx);
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double d = y[k] - cx[k] - (b_[k] + bl_[i][k]);
    s += d * d;
  }
  return 0.5 * s;
}

Vec QuadraticBilevel::lower_solution(const Vec& x) const {
  Vec yx;
  matvec(b_.size(), a_.size(), c_, x, yx);
  for (std::size_t k = 0; k < b_.size(); ++k) yx[k] += b_[k];
  return yx;
}

Vec QuadraticBilevel::true_hypergradient(const Vec& x) const {
  if (x.size() != a_.size()) throw std::invalid_argument("true_hypergradient: bad x dimension");
  // grad Phi = (x - a) + C^T (C x): grad_y f at y* is C x, Hessian is I,
  // and the cross term contributes -(-C^T) (C x).
  Vec cx, ctcx;
  matvec(b_.size(), a_.size(), c_, x, cx);
  matvec_t(b_.size(), a_.size(), c_, cx, ctcx);
  Vec out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - a_[k] + ctcx[k];
  return out;
}

Vec QuadraticBilevel::minimizer() const {
  const std::size_t p = a_.size(), q = b_.size();
  Vec m(p * p, 0.0);  // I + C^T C
  for (std::size_t k = 0; k < p; ++k) m[k * p + k] = 1.0;
  for (std::size_t r = 0; r < q; ++r)
    for (std::size_t ci = 0; ci < p; ++ci)
      for (std::size_t cj = 0; cj < p; ++cj)
        m[ci * p + cj] += c_[r * p + ci] * c_[r * p + cj];
  return solve_dense(p, std::move(m), a_);
}

// ---------------------------------------------------------------------------
// SyntheticLogisticHPO

SyntheticLogisticHPO::SyntheticLogisticHPO(std::vector<AgentData> agents)
    : agents_(std::move(agents)) {
  if (agents_.empty()) throw std::invalid_argument("synthetic: need at least one agent");
  dim_ = agents_.front().train.feature_dim;
  if (dim_ == 0) dim_ = agents_.front().validation.feature_dim;
  for (const auto& a : agents_) {
    a.train.validate();
    a.validation.validate();
    if (a.train.categorical() || a.validation.categorical())
      throw std::invalid_argument("synthetic: expects real-valued labels");
    if ((a.train.size() && a.train.feature_dim != dim_) ||
        (a.validation.size() && a.validation.feature_dim != dim_))
      throw std::invalid_argument("synthetic: inconsistent feature dimensions");
  }
}

namespace {

// Accumulates sum psi(y_e x_e^T w) over a dataset, or its gradient in w.
double logistic_sum_loss(const Dataset& d, const Vec& w) {
  double s = 0.0;
  for (std::size_t e = 0; e < d.size(); ++e) {
    const auto x = d.row(e);
    double u = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) u += x[k] * w[k];
    s += softplus_neg(d.labels[e] * u);
  }
  return s;
}

void logistic_sum_grad(const Dataset& d, const Vec& w, Vec& out) {
  for (std::size_t e = 0; e < d.size(); ++e) {
    const auto x = d.row(e);
    double u = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) u += x[k] * w[k];
    const double c = softplus_neg_d1(d.labels[e] * u) * d.labels[e];
    for (std::size_t k = 0; k < x.size(); ++k) out[k] += c * x[k];
  }
}

void logistic_sum_hvp(const Dataset& d, const Vec& w, const Vec& v, Vec& out) {
  for (std::size_t e = 0; e < d.size(); ++e) {
    const auto x = d.row(e);
    double u = 0.0, xv = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      u += x[k] * w[k];
      xv += x[k] * v[k];
    }
    const double c = softplus_neg_d2(d.labels[e] * u) * d.labels[e] * d.labels[e] * xv;
    for (std::size_t k = 0; k < x.size(); ++k) out[k] += c * x[k];
  }
}

}  // namespace

void SyntheticLogisticHPO::do_grad_upper_x(std::size_t, const Vec& x, const Vec&, Vec& out) const {
  out.assign(x.size(), 0.0);  // the validation objective does not involve lambda
}

void SyntheticLogisticHPO::do_grad_upper_y(std::size_t i, const Vec&, const Vec& y,
                                           Vec& out) const {
  out.assign(y.size(), 0.0);
  logistic_sum_grad(agents_[i].validation, y, out);
}

void SyntheticLogisticHPO::do_grad_lower_y(std::size_t i, const Vec& x, const Vec& y,
                                           Vec& out) const {
  out.assign(y.size(), 0.0);
  logistic_sum_grad(agents_[i].train, y, out);
  for (std::size_t k = 0; k < y.size(); ++k) out[k] += std::exp(x[k]) * y[k];
}

void SyntheticLogisticHPO::do_hvp_lower_yy(std::size_t i, const Vec& x, const Vec& y, const Vec& v,
                                           Vec& out) const {
  out.assign(y.size(), 0.0);
  logistic_sum_hvp(agents_[i].train, y, v, out);
  for (std::size_t k = 0; k < y.size(); ++k) out[k] += std::exp(x[k]) * v[k];
}

void SyntheticLogisticHPO::do_jvp_lower_xy(std::size_t, const Vec& x, const Vec& y, const Vec& v,
                                           Vec& out) const {
  // Only the regularizer couples lambda and w.
  out.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::exp(x[k]) * y[k] * v[k];
}

double SyntheticLogisticHPO::do_upper_loss(std::size_t i, const Vec&, const Vec& y) const {
  return logistic_sum_loss(agents_[i].validation, y);
}

double SyntheticLogisticHPO::do_lower_loss(std::size_t i, const Vec& x, const Vec& y) const {
  double reg = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) reg += std::exp(x[k]) * y[k] * y[k];
  return logistic_sum_loss(agents_[i].train, y) + 0.5 * reg;
}

double SyntheticLogisticHPO::strong_convexity_hint(const Vec& x) const {
  if (x.size() != dim_) throw std::invalid_argument("strong_convexity_hint: bad x dimension");
  double mn = std::exp(x[0]);
  for (std::size_t k = 1; k < x.size(); ++k) mn = std::min(mn, std::exp(x[k]));
  return mn;
}

std::optional<double> SyntheticLogisticHPO::validation_accuracy(const Vec& w) const {
  if (w.size() != dim_) throw std::invalid_argument("validation_accuracy: bad model dimension");
  // Binary readout for real-valued labels: sign agreement of the margin.
  std::size_t hits = 0, total = 0;
  for (const auto& a : agents_) {
    const Dataset& d = a.validation;
    for (std::size_t e = 0; e < d.size(); ++e) {
      const auto x = d.row(e);
      double u = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) u += x[k] * w[k];
      const bool pred = u >= 0.0, truth = d.labels[e] >= 0.0;
      hits += (pred == truth);
      ++total;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// SoftmaxHPO

SoftmaxHPO::SoftmaxHPO(std::vector<AgentData> agents, int classes, std::size_t feature_dim)
    : agents_(std::move(agents)), classes_(classes), feature_dim_(feature_dim) {
  if (agents_.empty()) throw std::invalid_argument("softmax: need at least one agent");
  if (classes_ < 2) throw std::invalid_argument("softmax: need at least two classes");
  if (feature_dim_ == 0) throw std::invalid_argument("softmax: feature_dim must be positive");
  for (const auto& a : agents_) {
    a.train.validate();
    a.validation.validate();
    if (!a.train.categorical() || !a.validation.categorical())
      throw std::invalid_argument("softmax: expects class labels");
    if ((a.train.size() && a.train.feature_dim != feature_dim_) ||
        (a.validation.size() && a.validation.feature_dim != feature_dim_))
      throw std::invalid_argument("softmax: inconsistent feature dimensions");
    for (int c : a.train.class_labels)
      if (c >= classes_) throw std::invalid_argument("softmax: label exceeds class count");
    for (int c : a.validation.class_labels)
      if (c >= classes_) throw std::invalid_argument("softmax: label exceeds class count");
  }
}

namespace {

// Stable softmax probabilities from logits.
void softmax_probs(const Vec& logits, Vec& probs) {
  double mx = logits[0];
  for (double s : logits) mx = std::max(mx, s);
  double z = 0.0;
  probs.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    probs[j] = std::exp(logits[j] - mx);
    z += probs[j];
  }
  for (double& pj : probs) pj /= z;
}

}  // namespace

void SoftmaxHPO::do_grad_upper_x(std::size_t, const Vec& x, const Vec&, Vec& out) const {
  out.assign(x.size(), 0.0);
}

void SoftmaxHPO::do_grad_upper_y(std::size_t i, const Vec&, const Vec& y, Vec& out) const {
  const Dataset& d = agents_[i].validation;
  out.assign(y.size(), 0.0);
  if (d.size() == 0) return;
  const double inv = 1.0 / static_cast<double>(d.size());
  const std::size_t c = classes_, p = feature_dim_;
  Vec logits(c), probs;
  for (std::size_t e = 0; e < d.size(); ++e) {
    const auto x = d.row(e);
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += y[j * p + k] * x[k];
      logits[j] = s;
    }
    softmax_probs(logits, probs);
    probs[d.class_labels[e]] -= 1.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double coeff = inv * probs[j];
      for (std::size_t k = 0; k < p; ++k) out[j * p + k] += coeff * x[k];
    }
  }
}

void SoftmaxHPO::do_grad_lower_y(std::size_t i, const Vec& x, const Vec& y, Vec& out) const {
  const Dataset& d = agents_[i].train;
  out.assign(y.size(), 0.0);
  const std::size_t c = classes_, p = feature_dim_;
  if (d.size() > 0) {
    const double inv = 1.0 / static_cast<double>(d.size());
    Vec logits(c), probs;
    for (std::size_t e = 0; e < d.size(); ++e) {
      const auto xr = d.row(e);
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) s += y[j * p + k] * xr[k];
        logits[j] = s;
      }
      softmax_probs(logits, probs);
      probs[d.class_labels[e]] -= 1.0;
      for (std::size_t j = 0; j < c; ++j) {
        const double coeff = inv * probs[j];
        for (std::size_t k = 0; k < p; ++k) out[j * p + k] += coeff * xr[k];
      }
    }
  }
  const double rc = 2.0 / (static_cast<double>(c) * static_cast<double>(p));
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t k = 0; k < p; ++k) out[j * p + k] += rc * std::exp(x[k]) * y[j * p + k];
}

void SoftmaxHPO::do_hvp_lower_yy(std::size_t i, const Vec& x, const Vec& y, const Vec& v,
                                 Vec& out) const {
  const Dataset& d = agents_[i].train;
  out.assign(y.size(), 0.0);
  const std::size_t c = classes_, p = feature_dim_;
  if (d.size() > 0) {
    const double inv = 1.0 / static_cast<double>(d.size());
    Vec logits(c), probs, vx(c);
    for (std::size_t e = 0; e < d.size(); ++e) {
      const auto xr = d.row(e);
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0, t = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          s += y[j * p + k] * xr[k];
          t += v[j * p + k] * xr[k];
        }
        logits[j] = s;
        vx[j] = t;
      }
      softmax_probs(logits, probs);
      // (diag(pi) - pi pi^T) (V x) per sample.
      double pv = 0.0;
      for (std::size_t j = 0; j < c; ++j) pv += probs[j] * vx[j];
      for (std::size_t j = 0; j < c; ++j) {
        const double coeff = inv * probs[j] * (vx[j] - pv);
        for (std::size_t k = 0; k < p; ++k) out[j * p + k] += coeff * xr[k];
      }
    }
  }
  const double rc = 2.0 / (static_cast<double>(c) * static_cast<double>(p));
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t k = 0; k < p; ++k) out[j * p + k] += rc * std::exp(x[k]) * v[j * p + k];
}

void SoftmaxHPO::do_jvp_lower_xy(std::size_t, const Vec& x, const Vec& y, const Vec& v,
                                 Vec& out) const {
  const std::size_t c = classes_, p = feature_dim_;
  const double rc = 2.0 / (static_cast<double>(c) * static_cast<double>(p));
  out.assign(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += y[j * p + k] * v[j * p + k];
    out[k] = rc * std::exp(x[k]) * s;
  }
}

double SoftmaxHPO::do_upper_loss(std::size_t i, const Vec&, const Vec& y) const {
  const Dataset& d = agents_[i].validation;
  if (d.size() == 0) return 0.0;
  const std::size_t c = classes_, p = feature_dim_;
  double total = 0.0;
  Vec logits(c);
  for (std::size_t e = 0; e < d.size(); ++e) {
    const auto xr = d.row(e);
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += y[j * p + k] * xr[k];
      logits[j] = s;
    }
    double mx = logits[0];
    for (double s : logits) mx = std::max(mx, s);
    double z = 0.0;
    for (double s : logits) z += std::exp(s - mx);
    total += std::log(z) + mx - logits[d.class_labels[e]];
  }
  return total / static_cast<double>(d.size());
}

double SoftmaxHPO::do_lower_loss(std::size_t i, const Vec& x, const Vec& y) const {
  const Dataset& d = agents_[i].train;
  const std::size_t c = classes_, p = feature_dim_;
  double total = 0.0;
  if (d.size() > 0) {
    Vec logits(c);
    for (std::size_t e = 0; e < d.size(); ++e) {
      const auto xr = d.row(e);
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) s += y[j * p + k] * xr[k];
        logits[j] = s;
      }
      double mx = logits[0];
      for (double s : logits) mx = std::max(mx, s);
      double z = 0.0;
      for (double s : logits) z += std::exp(s - mx);
      total += std::log(z) + mx - logits[d.class_labels[e]];
    }
    total /= static_cast<double>(d.size());
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t k = 0; k < p; ++k) reg += std::exp(x[k]) * y[j * p + k] * y[j * p + k];
  return total + reg / (static_cast<double>(c) * static_cast<double>(p));
}

double SoftmaxHPO::strong_convexity_hint(const Vec& x) const {
  if (x.size() != feature_dim_)
    throw std::invalid_argument("strong_convexity_hint: bad x dimension");
  double mn = std::exp(x[0]);
  for (std::size_t k = 1; k < x.size(); ++k) mn = std::min(mn, std::exp(x[k]));
  return 2.0 * mn / (static_cast<double>(classes_) * static_cast<double>(feature_dim_));
}

std::optional<double> SoftmaxHPO::validation_accuracy(const Vec& w) const {
  if (w.size() != lower_dim()) throw std::invalid_argument("validation_accuracy: bad model size");
  const std::size_t c = classes_, p = feature_dim_;
  std::size_t hits = 0, total = 0;
  for (const auto& a : agents_) {
    const Dataset& d = a.validation;
    for (std::size_t e = 0; e < d.size(); ++e) {
      const auto xr = d.row(e);
      std::size_t best = 0;
      double best_s = -1e308;
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) s += w[j * p + k] * xr[k];
        if (s > best_s) {
          best_s = s;
          best = j;
        }
      }
      hits += (static_cast<int>(best) == d.class_labels[e]);
      ++total;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace adasdbo
