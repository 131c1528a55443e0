#pragma once

#include <stdexcept>
#include <string>

namespace ehv {

enum class ErrorKind {
  NonConvergent,
  TruncationFailure,
  DomainError,
  PoleHit,
  BalancingViolation,
  NonTerminatingWithoutBound,
  ConstraintViolation,
  DegenerateConfiguration,
  UnsupportedFamily,
  DomainViolation,
  NotConverged,
  ResourceLimit,
  InadmissibleContour,
  SingularStep,
  InvalidSpec,
};

const char* to_string(ErrorKind k) noexcept;

// Every failure raised by the library carries one of the kinds above so that
// callers (the CLI in particular) can map it to a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace ehv
