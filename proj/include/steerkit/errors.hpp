#pragma once

#include <stdexcept>
#include <string>

namespace steerkit {

// Invariant violated by an input (dimensions, normalization, positivity, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed serialized input. Reported separately from invariant violations.
class SchemaError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical failure: non-convergence, singular quantities, lost precision.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace steerkit
