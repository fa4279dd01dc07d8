#pragma once

#include <stdexcept>
#include <string>

namespace pcekit {

/// Base class for every error raised by the library. The CLI maps each
/// subclass onto a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or out-of-range build parameters (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Undefined numerical quantity, e.g. a Sobol' index of a zero-variance model (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Black-box evaluation failure (exit code 3).
class ModelError : public Error {
public:
    using Error::Error;
};

/// File system or document format problem (exit code 4).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace pcekit
