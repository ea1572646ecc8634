#pragma once

#include <stdexcept>
#include <string>

namespace sot {

// Base class for all library errors. Subclasses mirror the failure modes of
// the numerical kernels and solvers so callers can catch them selectively.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual const char* kind() const { return "Error"; }
};

#define SOT_DEFINE_ERROR(NAME)                                  \
  class NAME : public Error {                                   \
   public:                                                      \
    explicit NAME(const std::string& msg)                       \
        : Error(std::string(#NAME) + ": " + msg) {}             \
    const char* kind() const override { return #NAME; }         \
  }

SOT_DEFINE_ERROR(AsymmetricInput);
SOT_DEFINE_ERROR(IndefiniteInput);
SOT_DEFINE_ERROR(SingularInput);
SOT_DEFINE_ERROR(FactorizationFailed);
SOT_DEFINE_ERROR(SingularBlock);
SOT_DEFINE_ERROR(RankDeficient);
SOT_DEFINE_ERROR(DimensionMismatch);
SOT_DEFINE_ERROR(SingularSource);
SOT_DEFINE_ERROR(NonFiniteLoss);
SOT_DEFINE_ERROR(DegenerateData);
SOT_DEFINE_ERROR(EmptyInput);
SOT_DEFINE_ERROR(SizeLimitExceeded);
SOT_DEFINE_ERROR(InfeasibleMarginals);
SOT_DEFINE_ERROR(UnassignedComponent);
SOT_DEFINE_ERROR(TooFewSamples);
SOT_DEFINE_ERROR(EmptyCluster);
SOT_DEFINE_ERROR(DegenerateProjection);
SOT_DEFINE_ERROR(ParseError);
SOT_DEFINE_ERROR(DecodeError);
SOT_DEFINE_ERROR(InvalidInput);
SOT_DEFINE_ERROR(SolverStalled);

#undef SOT_DEFINE_ERROR

}  // namespace sot
