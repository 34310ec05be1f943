#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace adasdbo {

/// An iterate or gradient left the representable range (non-finite values or
/// a primal norm beyond the blow-up bound). Divergence is a reportable run
/// outcome, not an internal bug.
class DivergenceError : public std::runtime_error {
 public:
  static constexpr std::size_t no_agent = static_cast<std::size_t>(-1);

  DivergenceError(std::uint64_t round, std::size_t agent, const std::string& what)
      : std::runtime_error("divergence at round " + std::to_string(round) +
                           (agent == no_agent ? std::string()
                                              : " (agent " + std::to_string(agent) + ")") +
                           ": " + what),
        round_(round),
        agent_(agent) {}

  std::uint64_t round() const { return round_; }
  std::size_t agent() const { return agent_; }

 private:
  std::uint64_t round_;
  std::size_t agent_;
};

/// A reference solver failed to meet its contract (iteration cap exceeded,
/// non-positive curvature, residual check failed).
class OracleFailure : public std::runtime_error {
 public:
  OracleFailure(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Iterative numeric routine did not converge (e.g. power iteration).
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input document (config file, IDX payload); message carries the
/// offending key or byte offset.
class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested metric is undefined for the problem (no held-out data).
class UnsupportedMetric : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adasdbo
