#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adacube {

/// Precondition violated by the caller.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The integrand returned a non-finite value or could not be evaluated.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double abscissa)
      : std::runtime_error(what), abscissa_(abscissa) {}
  explicit EvaluationError(const std::string& what)
      : std::runtime_error(what), abscissa_(0.0) {}
  double abscissa() const noexcept { return abscissa_; }

 private:
  double abscissa_;
};

/// Gram matrix could not be factorized even after jitter escalation.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature of an embedding piece did not converge.
class EmbeddingError : public std::runtime_error {
 public:
  EmbeddingError(const std::string& what, std::size_t piece)
      : std::runtime_error(what + " (piece " + std::to_string(piece) + ")"), piece_(piece) {}
  std::size_t piece() const noexcept { return piece_; }

 private:
  std::size_t piece_;
};

/// Posterior covariance on a sampling grid could not be factorized.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FittingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reference quadrature of a synthetic integrand failed.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const char* msg) {
  if (!cond) throw InvalidInput(msg);
}
}  // namespace detail

}  // namespace adacube
