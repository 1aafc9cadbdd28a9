#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lapewc {

/// Shapes or lengths that do not agree (params vs architecture, penalty vs theta).
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid argument values (negative lambda, empty dataset, unknown task id).
class ArgumentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A NaN or Inf showed up where only finite values are allowed.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent bookkeeping between consolidation objects.
class StateError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Optimizer diverged.
class TrainingError : public std::runtime_error {
  public:
    TrainingError(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

  private:
    std::size_t step_;
};

class UnsupportedOperation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Experiment configuration failed validation. `field` is a JSON-path style locator.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

}  // namespace lapewc
