#pragma once

#include <stdexcept>
#include <string>

namespace ifl {

// Each error class maps onto a CLI exit code: validation 2, resource guard 3,
// malformed input file 4.

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ifl
