#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glmmsel {

enum class ErrorKind {
  InvalidConfig,
  ParseError,
  MissingColumn,
  EmptyCluster,
  EmptyDataset,
  ZeroVarianceColumn,
  NonPositiveDefinite,
  SingularUpdate,
  DegenerateFit,
  LineSearchExhausted,
  PathComplete,
  NonBinaryResponse,
  NullTruth,
  EmptyPath,
  Unsupported,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a machine-readable category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace glmmsel
