#pragma once

#include <stdexcept>
#include <string>

namespace genpool {

// Base of every error the library throws. The CLI maps the three families
// below onto exit codes 1 (usage/contract), 2 (I/O) and 3 (numeric).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Usage / contract family.
class ContractError : public Error {
public:
    using Error::Error;
};

class ShapeError : public ContractError {
public:
    using ContractError::ContractError;
};

class ConfigError : public ContractError {
public:
    using ContractError::ContractError;
};

// I/O family.
class IoError : public Error {
public:
    using Error::Error;
};

// Numeric family.
class NumericError : public Error {
public:
    using Error::Error;
};

// A slice that must carry positive mass (for normalization) does not.
class DegenerateError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace genpool
