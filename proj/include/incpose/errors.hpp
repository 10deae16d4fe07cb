#pragma once

#include <stdexcept>
#include <string>

namespace incpose {

// Every library failure derives from Error so the CLI can map it to one record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define INCPOSE_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  };

INCPOSE_DEFINE_ERROR(DegenerateGeometry)
INCPOSE_DEFINE_ERROR(InvalidEpsilon)
INCPOSE_DEFINE_ERROR(EmptyHistogram)
INCPOSE_DEFINE_ERROR(EmptyStructure)
INCPOSE_DEFINE_ERROR(ParameterOutOfRange)
INCPOSE_DEFINE_ERROR(CoefficientOutOfRange)
INCPOSE_DEFINE_ERROR(RejectionOverflow)
INCPOSE_DEFINE_ERROR(EmptyInput)
INCPOSE_DEFINE_ERROR(MismatchedConfigs)
INCPOSE_DEFINE_ERROR(InvalidConfig)

#undef INCPOSE_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("ParseError", "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace incpose
