#pragma once

#include <stdexcept>
#include <string>

namespace pconv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated (shape mismatch, bad extent...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// A primitive produced NaN or Inf.
class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace pconv
