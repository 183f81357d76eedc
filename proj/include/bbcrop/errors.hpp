#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbcrop {

/// Invalid input parameters (rates, labels, sizes).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (e.g. k_a < |k_c|).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite values, failed root finding or constraint solving.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rotation axis that cannot be realized by an off-resonance pulse.
class AxisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Moving frame requested where |r1| or |r2| vanishes.
class DegenerateFrameError : public std::runtime_error {
 public:
  DegenerateFrameError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Failure while building a broadband sequence; names the offending period
/// (1-based) and the underlying cause.
class AssemblyError : public std::runtime_error {
 public:
  enum class Cause { DegenerateFrame, Axis, ChannelLimit, Coverage };
  AssemblyError(const std::string& what, std::size_t period, Cause cause)
      : std::runtime_error("period " + std::to_string(period) + ": " + what),
        period_(period),
        cause_(cause) {}
  std::size_t period() const { return period_; }
  Cause cause() const { return cause_; }

 private:
  std::size_t period_;
  Cause cause_;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace bbcrop
