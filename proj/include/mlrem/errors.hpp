#pragma once

#include <stdexcept>
#include <string>

namespace mlrem {

// Invalid configuration or violated precondition. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File system or stream failure (exit code 3).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// NaN/Inf in an iterate or another unrecoverable numerical failure (exit code 4).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mlrem
