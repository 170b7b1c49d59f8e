#pragma once

#include <stdexcept>
#include <string>

namespace penh {

/// Input outside a function's mathematical domain (bad probability, dof, index...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A parameter point that does not belong to the model's parameter space.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct LinalgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a test cannot be calibrated (e.g. a near-singular score covariance).
struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed test / regime / theta specification string.
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace penh
