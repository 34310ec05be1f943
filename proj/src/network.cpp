#include "adasdbo/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "adasdbo/errors.hpp"

namespace adasdbo {

namespace {

constexpr double kStochasticTol = 1e-12;

// Metropolis-Hastings weights over an undirected edge set: off-diagonal
// 1/(1+max(deg_i,deg_j)), diagonal absorbs the remainder. Doubly stochastic
// and symmetric by construction.
Vec metropolis_weights(std::size_t n, const std::vector<std::vector<std::size_t>>& adj) {
  Vec w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j : adj[i]) {
      const double wij = 1.0 / (1.0 + static_cast<double>(std::max(adj[i].size(), adj[j].size())));
      w[i * n + j] = wij;
      off += wij;
    }
    w[i * n + i] = 1.0 - off;
  }
  return w;
}

bool connected(std::size_t n, const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

void validate_doubly_stochastic(std::size_t n, const Vec& w) {
  if (w.size() != n * n) throw std::invalid_argument("mixing matrix: bad entry count");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (w[i * n + j] < -kStochasticTol)
        throw std::invalid_argument("mixing matrix: negative entry at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      row += w[i * n + j];
      col += w[j * n + i];
    }
    if (std::abs(row - 1.0) > kStochasticTol || std::abs(col - 1.0) > kStochasticTol)
      throw std::invalid_argument("mixing matrix: row/column sum " + std::to_string(i) +
                                  " deviates from 1");
  }
}

}  // namespace

double spectral_gap(const Vec& entries, std::size_t n) {
  if (entries.size() != n * n) throw std::invalid_argument("spectral_gap: bad entry count");
  if (n == 1) return 0.0;

  // D = W - J applied on the fly; power iteration on D^T D.
  const double inv_n = 1.0 / static_cast<double>(n);
  auto apply_d = [&](const Vec& x, Vec& out, bool transpose) {
    double sum = 0.0;
    for (double xi : x) sum += xi;
    const double shift = sum * inv_n;
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      if (transpose) {
        for (std::size_t j = 0; j < n; ++j) s += entries[j * n + i] * x[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) s += entries[i * n + j] * x[j];
      }
      out[i] = s - shift;
    }
  };

  Rng rng(0x9d2c5680u, "spectral-gap");
  Vec v(n), dv(n), mv(n);
  for (double& x : v) x = rng.normal();

  constexpr int kMaxIters = 10000;
  constexpr double kRelTol = 1e-10;
  double lambda = 0.0;
  for (int it = 0; it < kMaxIters; ++it) {
    apply_d(v, dv, /*transpose=*/false);
    apply_d(dv, mv, /*transpose=*/true);
    const double next = std::sqrt(norm_sq(mv));
    if (next < 1e-300) return 0.0;  // W == J to round-off
    scale(1.0 / next, mv);
    const double rel = std::abs(next - lambda) / std::max(next, 1e-300);
    v = mv;
    lambda = next;
    if (it > 0 && rel < kRelTol) return lambda;
  }
  throw NumericalError("spectral_gap: power iteration stalled at lambda=" +
                       std::to_string(lambda) + " after 10000 iterations");
}

MixingMatrix MixingMatrix::from_entries(std::size_t n, Vec entries) {
  validate_doubly_stochastic(n, entries);
  const double rho = spectral_gap(entries, n);
  if (rho >= 1.0)
    throw std::invalid_argument("mixing matrix: rho_w = " + std::to_string(rho) +
                                " >= 1 (disconnected or periodic topology)");
  return MixingMatrix(n, std::move(entries), rho);
}

MixingMatrix MixingMatrix::ring(std::size_t n, double self_weight) {
  if (n < 2) throw std::invalid_argument("ring: need n >= 2");
  if (!(self_weight > 0.0 && self_weight < 1.0))
    throw std::invalid_argument("ring: self-weight must lie in (0,1)");
  Vec w(n * n, 0.0);
  const double half = (1.0 - self_weight) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i * n + i] = self_weight;
    w[i * n + (i + 1) % n] += half;
    w[i * n + (i + n - 1) % n] += half;
  }
  return from_entries(n, std::move(w));
}

MixingMatrix MixingMatrix::complete(std::size_t n) {
  if (n < 1) throw std::invalid_argument("complete: need n >= 1");
  Vec w(n * n, 1.0 / static_cast<double>(n));
  validate_doubly_stochastic(n, w);
  return MixingMatrix(n, std::move(w), 0.0);
}

MixingMatrix MixingMatrix::ladder(std::size_t n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("ladder: need even n >= 4");
  const std::size_t m = n / 2;  // rail length; nodes i and i+m form rung i
  std::vector<std::vector<std::size_t>> adj(n);
  auto link = [&](std::size_t a, std::size_t b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  for (std::size_t i = 0; i + 1 < m; ++i) {
    link(i, i + 1);          // top rail
    link(m + i, m + i + 1);  // bottom rail
  }
  for (std::size_t i = 0; i < m; ++i) link(i, m + i);  // rungs
  return from_entries(n, metropolis_weights(n, adj));
}

MixingMatrix MixingMatrix::random(std::size_t n, double edge_prob, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random: need n >= 2");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0))
    throw std::invalid_argument("random: edge_prob must lie in (0,1]");
  Rng rng(seed, "random-topology");
  constexpr int kMaxTries = 100;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.uniform() < edge_prob) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
    if (connected(n, adj)) return from_entries(n, metropolis_weights(n, adj));
  }
  throw NumericalError("random topology: no connected draw in " + std::to_string(kMaxTries) +
                       " attempts (edge_prob too small?)");
}

std::vector<Vec> MixingMatrix::mix(const std::vector<Vec>& block) const {
  if (block.size() != n_) throw std::invalid_argument("mix: block row count != n");
  const std::size_t d = block.empty() ? 0 : block.front().size();
  std::vector<Vec> out(n_, Vec(d, 0.0));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (block[j].size() != d) throw std::invalid_argument("mix: ragged block");
      axpy(w_[i * n_ + j], block[j], out[i]);
    }
  }
  return out;
}

Vec MixingMatrix::mix(const Vec& per_agent) const {
  if (per_agent.size() != n_) throw std::invalid_argument("mix: vector length != n");
  Vec out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += w_[i * n_ + j] * per_agent[j];
    out[i] = s;
  }
  return out;
}

}  // namespace adasdbo
