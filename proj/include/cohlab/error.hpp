#pragma once

#include <stdexcept>
#include <string>

namespace cohlab {

// Exception families map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files, dangling references, invalid parameters (exit 2).
class InputError : public Error {
  public:
    using Error::Error;
};

/// Non-convergence, singular systems, non-finite states (exit 3).
class NumericalError : public Error {
  public:
    using Error::Error;
};

}  // namespace cohlab
