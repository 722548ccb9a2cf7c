#pragma once

#include <stdexcept>
#include <string>

namespace hsc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents (bad magic, truncation, wrong dimensions).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Data that parses but violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsc
