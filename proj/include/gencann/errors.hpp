#pragma once

#include <stdexcept>
#include <string>

namespace gencann {

/// Precondition violated by caller-supplied data (bad stretch, shape mismatch, ...).
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable dataset / model file. Carries the 1-based row when known.
class IngestionError : public std::runtime_error {
public:
  IngestionError(const std::string& msg, long row = -1)
      : std::runtime_error(row >= 0 ? "row " + std::to_string(row) + ": " + msg : msg),
        row_(row) {}
  long row() const noexcept { return row_; }

private:
  long row_;
};

/// Non-finite energy or stress encountered while evaluating a model.
class EvaluationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// R^2 requested on a constant target vector.
class UndefinedMetric : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

} // namespace gencann
