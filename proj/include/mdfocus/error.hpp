#ifndef MDFOCUS_ERROR_HPP
#define MDFOCUS_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdfocus {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or non-finite data handed to an operation.
class InputError : public Error {
public:
    using Error::Error;
};

// Bad configuration: unknown keys, inconsistent parameters, missing thresholds.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A parameter outside the natural-parameter domain of a family.
class DomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

// Segment with zero observations passed to a maximized likelihood.
class UndefinedSegment : public DomainError {
public:
    using DomainError::DomainError;
};

// Delay bound requested for a zero-size change.
class InfiniteDelay : public DomainError {
public:
    using DomainError::DomainError;
};

class RejectedObservation : public InputError {
public:
    RejectedObservation(std::size_t coordinate, const std::string& what)
        : InputError("coordinate " + std::to_string(coordinate) + ": " + what),
          coordinate_(coordinate) {}

    std::size_t coordinate() const noexcept { return coordinate_; }

private:
    std::size_t coordinate_;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

}  // namespace mdfocus

#endif
