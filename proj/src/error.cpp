#include "cpt/error.hpp"

namespace cpt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::NonConvergentBaseline: return "NonConvergentBaseline";
    case ErrorKind::NoResonance: return "NoResonance";
    case ErrorKind::Unbracketed: return "Unbracketed";
    case ErrorKind::NotBracketed: return "NotBracketed";
    case ErrorKind::InvalidSpin: return "InvalidSpin";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MonotonicityError: return "MonotonicityError";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace cpt
