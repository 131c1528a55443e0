#include "ehv/error.hpp"

namespace ehv {

const char* to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::TruncationFailure: return "TruncationFailure";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::BalancingViolation: return "BalancingViolation";
    case ErrorKind::NonTerminatingWithoutBound: return "NonTerminatingWithoutBound";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::ResourceLimit: return "ResourceLimit";
    case ErrorKind::InadmissibleContour: return "InadmissibleContour";
    case ErrorKind::SingularStep: return "SingularStep";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

}  // namespace ehv
