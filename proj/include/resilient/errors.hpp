#pragma once

#include <stdexcept>
#include <string>

namespace resilient {

// Base of every error raised by the library. Callers that only care about
// success/failure can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A matrix that must have full row rank does not.
class RankError : public Error {
public:
    RankError(const std::string& what, int expected_rank, int numerical_rank)
        : Error(what), expected_rank_(expected_rank), numerical_rank_(numerical_rank) {}

    int expected_rank() const noexcept { return expected_rank_; }
    int numerical_rank() const noexcept { return numerical_rank_; }

private:
    int expected_rank_;
    int numerical_rank_;
};

// An input signal left its admissible unit ball.
class ConstraintError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation (t_f <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Degenerate constants (c1 = 0, D_S = 0) where a formula has no meaning.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// Requested accuracy needs more partition intervals than the cap allows.
class CapError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace resilient
