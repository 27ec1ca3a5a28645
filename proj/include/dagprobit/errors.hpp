#pragma once

#include <stdexcept>
#include <string>

namespace dagprobit {

// Bad user input: malformed files, out-of-range config, violated preconditions.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: non-s.p.d. matrix where one is required, NaN/Inf in a
// place that signals data corruption. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dagprobit
