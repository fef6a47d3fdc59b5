#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qjm {

/// Invalid model specification, prior or run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that fails validation (unknown subject, bad CSV row, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky factorization failed; `pivot` is the zero-based failing column.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Adaptive rejection sampling failure. `abscissa` is the point at which
/// the problem was detected (NaN when not tied to a point).
class ArsError : public std::runtime_error {
 public:
  ArsError(const std::string& what, double abscissa)
      : std::runtime_error(what), abscissa_(abscissa) {}
  double abscissa() const noexcept { return abscissa_; }

 private:
  double abscissa_;
};

/// Any failure inside a Gibbs sweep, tagged with the block and iteration.
class SamplerError : public std::runtime_error {
 public:
  SamplerError(const std::string& block, long iteration, const std::string& cause)
      : std::runtime_error("sampler failure in block '" + block + "' at iteration " +
                           std::to_string(iteration) + ": " + cause),
        block_(block),
        iteration_(iteration) {}
  const std::string& block() const noexcept { return block_; }
  long iteration() const noexcept { return iteration_; }

 private:
  std::string block_;
  long iteration_;
};

}  // namespace qjm
