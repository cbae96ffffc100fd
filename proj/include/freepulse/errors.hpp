#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace freepulse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class DimMismatch : public Error {
 public:
  using Error::Error;
};

class DimNotPowerOfTwo : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class TargetTooSmall : public Error {
 public:
  using Error::Error;
};

class TopologyMismatch : public Error {
 public:
  using Error::Error;
};

class FrameUnsupported : public Error {
 public:
  using Error::Error;
};

class InvalidDensity : public Error {
 public:
  using Error::Error;
};

class UnknownName : public Error {
 public:
  using Error::Error;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

class NotReached : public Error {
 public:
  explicit NotReached(int max_bins)
      : Error("chemical accuracy not reached within " + std::to_string(max_bins) + " bins"),
        max_bins_(max_bins) {}

  int max_bins() const noexcept { return max_bins_; }

 private:
  int max_bins_;
};

class DegenerateTrajectory : public Error {
 public:
  using Error::Error;
};

}  // namespace freepulse
