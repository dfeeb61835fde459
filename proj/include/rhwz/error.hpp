#pragma once

#include <stdexcept>
#include <string>

namespace rhwz {

enum class ErrorKind {
  Validation,
  Singular,
  AmbiguousCell,
  Defective,
  BranchCut,
  NotPositiveDefinite,
  Degree,
  StabilityRange,
  NotAdmissible,
  Reducible,
  Ordering,
  Proximity,
  Stiffness,
  Resonance,
  RegularLocus,
  UnreliableExtrapolation,
  Radius,
  Hole,
  NonConvergence,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind k, const std::string& what)
      : std::runtime_error(std::string(kind_name(k)) + ": " + what), kind_(k) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rhwz
