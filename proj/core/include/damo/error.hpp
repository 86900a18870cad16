#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace damo {

/// Precondition or argument violation (bad dimensions, empty input, out-of-range index).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or incompatible persisted record (unknown schema, version mismatch, missing field).
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during surrogate training.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::size_t step);

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Refusal to run a sweep that exceeds its evaluation budget.
class BudgetError : public DomainError {
public:
    using DomainError::DomainError;
};

} // namespace damo
