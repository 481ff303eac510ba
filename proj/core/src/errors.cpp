#include "glmmsel/errors.hpp"

namespace glmmsel {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::EmptyCluster: return "EmptyCluster";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorKind::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorKind::SingularUpdate: return "SingularUpdate";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::LineSearchExhausted: return "LineSearchExhausted";
    case ErrorKind::PathComplete: return "PathComplete";
    case ErrorKind::NonBinaryResponse: return "NonBinaryResponse";
    case ErrorKind::NullTruth: return "NullTruth";
    case ErrorKind::EmptyPath: return "EmptyPath";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

}  // namespace glmmsel
