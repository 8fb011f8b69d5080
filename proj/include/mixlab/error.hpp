#pragma once

#include <stdexcept>
#include <string>

namespace mixlab {

// Precondition violated by caller-supplied data (bad parameters, malformed
// distributions, asymmetric grids, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Problem exceeds a configured enumeration or LP size limit.
class SizeLimitExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

// The input describes a degenerate limit (zero long-run variance etc.).
class DegenerateModel : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

}  // namespace mixlab
