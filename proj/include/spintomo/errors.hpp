#pragma once

#include <stdexcept>
#include <string>

namespace spintomo {

// Bad argument values (spin out of range, zero direction, dimension mismatch).
using InvalidArgument = std::invalid_argument;

class DegenerateFrame : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FrameSearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A density matrix or field that violates Hermiticity/normalization.
class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndersampledDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spintomo
