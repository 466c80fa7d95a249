#pragma once

#include <stdexcept>
#include <string>

namespace nestevo {

/// Shape mismatch between values that must agree (vector lengths, genome
/// conditioning, objective directions).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nestevo
