#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ordmono {

enum class ErrorKind {
  InvalidSchema,
  UnknownLevel,
  EmptyCategory,
  MissingValue,
  DimensionMismatch,
  NonIncreasingIntercepts,
  ProbabilityUnderflow,
  Nonconvergence,
  Separation,
  DegenerateDesign,
  InvalidArgument,
  ConstrainedFitHasNoSE,
  CombinationCapExceeded,
  TooManyFailures,
  Parse,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ordmono
