#pragma once

#include <stdexcept>
#include <string>

namespace vocadapt {

// Raised for malformed inputs or violated preconditions on data. The CLI maps
// it to exit status 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for invalid configuration values (bad flags, out-of-range knobs).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace vocadapt
