#pragma once

#include <stdexcept>
#include <string>

namespace plenopose {

// Index outside a container's bounds (bad pixel, view or plane index).
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Mismatched array shapes between operands.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A type invariant does not hold (bad dimensions, NaN data, ...).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or incomplete on-disk data.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration (unknown keys, out-of-range values).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace plenopose
