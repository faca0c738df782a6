#pragma once

#include <stdexcept>
#include <string>

namespace crt {

/// Bad configuration or argument that is detectable before any compute.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Rank-check failure, non-finite values, or another numerical breakdown.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed, truncated, or unreadable files.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace crt
