#pragma once

#include <stdexcept>
#include <string>

namespace wegnerlab {

// Invalid model or violated precondition (CLI exit code 2).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantity could not be resolved at the requested numerical resolution
// (CLI exit code 3).
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or command line (CLI exit code 64).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wegnerlab
