// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace hrtfgroup {

// Malformed or missing input data (files, rows, shapes).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent or unusable configuration (empty bands, hash mismatches, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or degenerate numerics encountered at runtime.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hrtfgroup
