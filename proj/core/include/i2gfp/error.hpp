#pragma once

#include <stdexcept>
#include <string>

namespace i2gfp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: config files, CLI flags, incompatible settings. Exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Unreadable/corrupt files, write failures. Exit code 1.
struct IoError : Error {
  using Error::Error;
};

// Dimension or tensor-shape mismatch between inputs that must agree.
struct ShapeError : Error {
  using Error::Error;
};

}  // namespace i2gfp
