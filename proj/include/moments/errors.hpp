#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace moments {

struct ParseError : std::runtime_error {
  ParseError(std::size_t pos, const std::string& what)
      : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + what), position(pos) {}
  std::size_t position;
};

struct MissingBindingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonRealError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidFamilyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KindMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotHarmonicError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotLinearError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateEqualityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SeedingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace moments
