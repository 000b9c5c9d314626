#pragma once

#include <stdexcept>
#include <string>

namespace fsrl {

/// Invalid numeric parameter (non-positive width, out-of-range index, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimensionality or table-shape mismatch.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Call sequence violates the environment or learner protocol.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Inconsistent or unparsable run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or serialization failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsrl
