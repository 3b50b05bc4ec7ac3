#include "bergman/error.hpp"

namespace bergman {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DivisionByZeroJet: return "DivisionByZeroJet";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::CacheCorrupt: return "CacheCorrupt";
    case ErrorKind::SeriesNotConverged: return "SeriesNotConverged";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DegeneratePlane: return "DegeneratePlane";
    case ErrorKind::OutsideCollar: return "OutsideCollar";
    case ErrorKind::SingularHessian: return "SingularHessian";
    case ErrorKind::DegenerateLeviForm: return "DegenerateLeviForm";
    case ErrorKind::UnclassifiedField: return "UnclassifiedField";
    case ErrorKind::NotBergmanPhi: return "NotBergmanPhi";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::InsufficientRows: return "InsufficientRows";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace bergman
