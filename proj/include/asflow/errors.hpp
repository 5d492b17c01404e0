#pragma once

#include <stdexcept>
#include <string>

namespace asflow {

/// Malformed input: traces, configs, sweep specs. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable files. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace asflow
