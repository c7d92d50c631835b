#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gjsscc {

/// Malformed input bytes (raster files, bitstream headers).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A precondition on argument values or geometry does not hold.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid user configuration (CLI flags, config files, sweep grids).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classification oracle failed: transport, timeout, or protocol violation.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Algorithm 1 merged every region and still could not exceed the threshold.
class ThresholdUnachievable : public std::runtime_error {
 public:
  explicit ThresholdUnachievable(double best)
      : std::runtime_error("threshold unachievable under profile (best p_D = " +
                           std::to_string(best) + ")"),
        best_(best) {}
  double best_probability() const noexcept { return best_; }

 private:
  double best_;
};

}  // namespace gjsscc
