#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maskfuse {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raster operands disagree on width/height (or class count).
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Operation called outside its domain (empty mask where one is required, bad grid size, ...).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Text could not be parsed; `offset` is the byte position of the failure.
class ParseError : public Error {
  public:
    ParseError(std::string const& message, std::size_t offset)
        : Error(message + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

/// File missing or unreadable, or an on-disk format violation.
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace maskfuse
