#pragma once

#include <stdexcept>
#include <string>

namespace aifad {

/// Invalid configuration values, unknown keys or malformed sweep axes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The observation has zero likelihood under every hypothesis with prior mass.
class DegenerateBelief : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or parameter shapes disagree with a network's layer dimensions.
class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration would exceed the supported problem size.
class TooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace aifad
