#pragma once

#include <stdexcept>
#include <string>

namespace bergman {

enum class ErrorKind {
  DivisionByZeroJet,
  DomainError,
  OutsideDomain,
  QuadratureFailure,
  CacheCorrupt,
  SeriesNotConverged,
  NotPositiveDefinite,
  DegeneratePlane,
  OutsideCollar,
  SingularHessian,
  DegenerateLeviForm,
  UnclassifiedField,
  NotBergmanPhi,
  RootNotBracketed,
  InsufficientRows,
  ConfigError,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bergman
