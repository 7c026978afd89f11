#pragma once

#include <stdexcept>

namespace swingpde {

/// Raised when an input file cannot be parsed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a model violates one of its structural invariants.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace swingpde
