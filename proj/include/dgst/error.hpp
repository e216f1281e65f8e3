#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgst {

// Base for every recoverable failure raised by the library. Invariant
// violations that indicate a bug use std::logic_error instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateQuad : public Error {
 public:
  using Error::Error;
};

class OutsideQuad : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& reason)
      : Error("byte " + std::to_string(offset) + ": " + reason), offset_(offset), reason_(reason) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

class PlacementFailure : public Error {
 public:
  PlacementFailure(std::size_t achieved, std::size_t requested)
      : Error("placed " + std::to_string(achieved) + " of " + std::to_string(requested) +
              " boxes"),
        achieved_(achieved) {}
  std::size_t achieved() const noexcept { return achieved_; }

 private:
  std::size_t achieved_;
};

class MissingImage : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgst
