#pragma once

#include <stdexcept>
#include <string>

namespace auxetikit {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad geometry, material, flags).
class ValidationError : public Error {
public:
   using Error::Error;
};

/// Iterative solve failed to reach its tolerance or produced non-finite values.
class ConvergenceError : public Error {
public:
   using Error::Error;
};

/// Result is undefined for the given input (e.g. nu_eff of a fully void cell).
class DegenerateError : public Error {
public:
   using Error::Error;
};

/// Malformed or incompatible file content.
class FormatError : public Error {
public:
   using Error::Error;
};

} // namespace auxetikit
