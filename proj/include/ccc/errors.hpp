#ifndef CCC_ERRORS_HPP
#define CCC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ccc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid input: bad schema, violated precondition, out-of-domain argument.
/// Maps to exit code 2 in the CLI.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure during a computation: divergent integral, tabulation
/// overflow, non-convergent iteration. Maps to exit code 3 in the CLI.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace ccc

#endif
