#pragma once

#include <stdexcept>
#include <string>

namespace jbmir {

// Error categories map one-to-one onto CLI exit codes (see tools/jbmir_cli.cpp).

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeometryMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace jbmir
