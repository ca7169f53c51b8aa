#pragma once

#include <stdexcept>
#include <string>

namespace fractel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-finite input, order out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical kernel could not reach its accuracy target.
class AccuracyFailure : public Error {
public:
    AccuracyFailure(const std::string& what, double estimate)
        : Error(what), estimate_(estimate) {}

    /// Error estimate that was actually achieved.
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// Extrapolation toward t -> 0+ did not settle.
class NoLimit : public Error {
public:
    using Error::Error;
};

/// Input outside the family a routine supports in closed form.
class UnsupportedInput : public Error {
public:
    using Error::Error;
};

/// Operation invoked on an object that lacks the data it needs.
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace fractel
