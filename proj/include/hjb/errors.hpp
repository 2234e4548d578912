#pragma once

#include <stdexcept>
#include <string>

namespace hjb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs violate a precondition (bad dimensions, non-nested grids, unknown names).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A NaN/inf appeared where only finite values are allowed.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An iterative linear solve stalled before reaching its residual target.
class SolverStagnation : public Error {
public:
    SolverStagnation(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Experiment configuration is malformed; `key()` names the offending entry.
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& key, const std::string& what)
        : InvalidArgument(key.empty() ? what : key + ": " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Reading or writing a result file failed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hjb
