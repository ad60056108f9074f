#pragma once

#include <stdexcept>
#include <string>

namespace viscoid {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs are individually well-formed but violate a precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Objects do not fit together (grid mismatch, wrong dimensions).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure could not produce a trustworthy answer.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Malformed configuration text or values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent on-disk data.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace viscoid
