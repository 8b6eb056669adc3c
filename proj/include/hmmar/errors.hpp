#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmmar {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidModel : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// The transition matrix has no unique invariant measure.
class NonErgodicChain : public Error {
public:
    using Error::Error;
};

/// Stability analysis is only defined for first-order models.
class UnsupportedOrder : public Error {
public:
    explicit UnsupportedOrder(std::size_t order);
    std::size_t order;
};

class NumericalUnderflow : public Error {
public:
    NumericalUnderflow(long t, const std::string& detail);
    long t;
};

/// A spectral or contraction condition required by a closed-form limit fails.
class ConditionViolated : public Error {
public:
    ConditionViolated(std::string condition, double value);
    std::string condition;
    double value;
};

class DegenerateRegime : public Error {
public:
    DegenerateRegime(std::size_t regime, const std::string& detail);
    std::size_t regime;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class AllRestartsFailed : public Error {
public:
    explicit AllRestartsFailed(std::vector<std::string> reasons);
    std::vector<std::string> reasons;
};

}  // namespace hmmar
