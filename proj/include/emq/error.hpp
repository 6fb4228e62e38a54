// error.hpp - exception hierarchy shared by every emq module

#pragma once

#include <stdexcept>
#include <string>

namespace emq {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad dimensions, unknown labels, layout mismatches, out-of-domain inputs.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A physical precondition of a protocol or model does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Population leaked into the top Fock levels of a truncated mode.
class TruncationError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

// Integrator step-size failure, degenerate steady state, invariant breach.
class NumericalError : public Error {
public:
    using Error::Error;
};

class VerificationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0, std::string key = {})
        : Error(what), line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

}  // namespace emq
