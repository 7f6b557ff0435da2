#pragma once
// Error taxonomy shared by the whole toolchain.
//
// ConfigError    - bad configuration, missing templates, unknown attributes
// DataError      - fatal problems in input data (empty joins, degenerate splits)
// IoError        - file system failures
// BackendError   - LM backend failures that survived retry
// InvariantError - internal state that should be impossible; always a bug

#include <stdexcept>
#include <string>

namespace cft {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct BackendError : Error {
    using Error::Error;
};

struct InvariantError : Error {
    using Error::Error;
};

} // namespace cft
