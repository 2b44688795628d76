#pragma once

#include <stdexcept>

namespace atagan {

/// Malformed or mismatched file content (checkpoints, PNM images, manifests).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or command-line input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace atagan
