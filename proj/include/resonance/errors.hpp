#pragma once

#include <stdexcept>
#include <string>

namespace resonance {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called with the wrong model family or invalid arguments.
class UsageError : public Error {
public:
    using Error::Error;
};

/// A documented precondition does not hold (e.g. unstable start for zeta).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A solution left its domain, or blew up in finite time.
class DivergedError : public Error {
public:
    DivergedError(const std::string& what, double time)
        : Error(what), time_(time) {}

    /// Time at which the solution left the domain.
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// More than one sign change where exactly one was expected.
class AmbiguityError : public Error {
public:
    AmbiguityError(const std::string& what, int count)
        : Error(what), count_(count) {}

    int count() const noexcept { return count_; }

private:
    int count_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// A bisection bracket does not straddle its target.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Configuration text could not be parsed or validated.
class ParseError : public Error {
public:
    ParseError(int line, std::string key, const std::string& message)
        : Error(format(line, key, message)), line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    static std::string format(int line, const std::string& key, const std::string& message)
    {
        std::string out = "line " + std::to_string(line);
        if (!key.empty()) out += ", key '" + key + "'";
        return out + ": " + message;
    }

    int line_;
    std::string key_;
};

}  // namespace resonance
