#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adasdbo/linalg.hpp"
#include "adasdbo/rng.hpp"

namespace adasdbo {

/// Squared spectral norm of (W - J) where J = 11^T/n, computed by power
/// iteration on (W-J)^T (W-J) to relative tolerance 1e-10 (cap 10000).
/// Works on arbitrary square matrices; throws NumericalError on stagnation.
double spectral_gap(const Vec& entries, std::size_t n);

/// Validated doubly stochastic gossip matrix with its cached contraction
/// factor rho_w = ||W - J||_2^2.
class MixingMatrix {
 public:
  /// Ring with self-weight w on the diagonal and (1-w)/2 per neighbor;
  /// n = 2 collapses both neighbor shares onto the single peer.
  static MixingMatrix ring(std::size_t n, double self_weight);

  /// W = J (every entry 1/n).
  static MixingMatrix complete(std::size_t n);

  /// 2 x (n/2) ladder graph with Metropolis-Hastings weights. Requires even
  /// n >= 4.
  static MixingMatrix ladder(std::size_t n);

  /// Erdos-Renyi graph with Metropolis-Hastings weights; redraws until
  /// connected (bounded retries).
  static MixingMatrix random(std::size_t n, double edge_prob, std::uint64_t seed);

  /// Validates double stochasticity, nonnegativity and rho_w < 1.
  static MixingMatrix from_entries(std::size_t n, Vec entries);

  std::size_t size() const { return n_; }
  double entry(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  const Vec& entries() const { return w_; }
  double rho_w() const { return rho_w_; }

  /// W * block for an n x d block stored as n rows. Preserves column means
  /// to round-off.
  std::vector<Vec> mix(const std::vector<Vec>& block) const;

  /// W * s for one scalar per agent (accumulator mixing).
  Vec mix(const Vec& per_agent) const;

 private:
  MixingMatrix(std::size_t n, Vec entries, double rho)
      : n_(n), w_(std::move(entries)), rho_w_(rho) {}

  std::size_t n_;
  Vec w_;
  double rho_w_;
};

}  // namespace adasdbo
