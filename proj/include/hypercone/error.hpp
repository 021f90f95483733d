// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_ERROR_HPP
#define HYPERCONE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hypercone {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidScale : public Error {
public:
    explicit InvalidScale(const std::string& what) : Error("invalid scale: " + what) {}
};

class InfeasibleSpec : public Error {
public:
    explicit InfeasibleSpec(const std::string& what) : Error("infeasible spec: " + what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error("precondition violated: " + what) {}
};

class AliasingError : public Error {
public:
    explicit AliasingError(const std::string& what) : Error("aliasing: " + what) {}
};

class UndefinedQuotient : public Error {
public:
    explicit UndefinedQuotient(const std::string& what) : Error("undefined quotient: " + what) {}
};

class MismatchError : public Error {
public:
    explicit MismatchError(const std::string& what) : Error("mismatch: " + what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format error: " + what) {}
};

} // namespace hypercone

#endif
