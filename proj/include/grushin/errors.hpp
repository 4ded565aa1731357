#pragma once
#include <stdexcept>

namespace grushin {

// Invalid experiment input (config file, profile spec, geometry). CLI exit 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solver failure or violated numerical precondition. CLI exit 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifact read/write failure. CLI exit 4.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace grushin
