#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vkfem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: expressions, config files, mesh files.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_ = 0;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A linear system in the solver could not be factorized.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

}  // namespace vkfem
