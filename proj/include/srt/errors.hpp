#pragma once

#include <stdexcept>
#include <string>

namespace srt {

// Invalid configuration or argument. The message names the offending field.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Operand shapes disagree (image vs grid, sinogram vs geometry).
class DimensionError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class IndexError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

// Malformed, truncated or corrupted binary stream.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf encountered during an iterative computation.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string &what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

} // namespace srt
