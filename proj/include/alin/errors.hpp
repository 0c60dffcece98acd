#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alin {

/// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A NaN or Inf appeared inside an iterative method.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t iteration)
        : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
          iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// An inner solver failed to reach its tolerance; the message carries the outer context.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
    if (!ok) throw DimensionError(what);
}

inline void require(bool ok, const char* what) {
    if (!ok) throw PreconditionError(what);
}

}  // namespace detail
}  // namespace alin
