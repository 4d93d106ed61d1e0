#pragma once

#include <stdexcept>
#include <string>

namespace gsir {

/// Malformed arguments: shape mismatches, out-of-range parameters, degenerate data.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid experiment or CLI configuration. Messages name the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Eigensolver failure or a violated numerical invariant.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gsir
