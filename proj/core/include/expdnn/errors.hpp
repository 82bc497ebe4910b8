#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace expdnn {

/// Dimension disagreement between tensors or between a tensor and its config.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid network/experiment configuration (bad sizes, illegal pairings, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV cells, JSON documents, model files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (missing file, unwritable path).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value where a finite one is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training loss became non-finite; carries the offending epoch.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  std::uint64_t epoch() const { return epoch_; }

 private:
  std::uint64_t epoch_;
};

}  // namespace expdnn
