#pragma once

#include <stdexcept>
#include <string>

namespace tribell {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TRIBELL_DEFINE_ERROR(Name)             \
  class Name : public Error {                  \
   public:                                     \
    using Error::Error;                        \
  };

TRIBELL_DEFINE_ERROR(NormalizationError)
TRIBELL_DEFINE_ERROR(RangeError)
TRIBELL_DEFINE_ERROR(SignallingError)
TRIBELL_DEFINE_ERROR(BasisError)
TRIBELL_DEFINE_ERROR(DuplicateIdError)
TRIBELL_DEFINE_ERROR(SolverError)
TRIBELL_DEFINE_ERROR(UnsupportedLevel)
TRIBELL_DEFINE_ERROR(IncompleteSet)
TRIBELL_DEFINE_ERROR(StructureError)
TRIBELL_DEFINE_ERROR(DimensionGate)
TRIBELL_DEFINE_ERROR(CertificationFailure)
TRIBELL_DEFINE_ERROR(KeyMismatch)
TRIBELL_DEFINE_ERROR(SeparationNotReproduced)

#undef TRIBELL_DEFINE_ERROR

/// Parse failure; `where` names the offending line or field.
class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace tribell
