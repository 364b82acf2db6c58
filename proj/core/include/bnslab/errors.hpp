#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bnslab {

/// Invalid argument supplied by the caller (bad range, wrong dimension, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite value encountered while training a score network.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::int64_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

/// A trajectory inside a batch failed; names the trajectory and the step.
class BatchError : public std::runtime_error {
 public:
  BatchError(const std::string& what, std::int64_t trajectory, int step)
      : std::runtime_error(what), trajectory_(trajectory), step_(step) {}
  std::int64_t trajectory() const noexcept { return trajectory_; }
  int step() const noexcept { return step_; }

 private:
  std::int64_t trajectory_;
  int step_;
};

}  // namespace bnslab
