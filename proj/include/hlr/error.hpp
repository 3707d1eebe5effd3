#pragma once

#include <stdexcept>
#include <string>

namespace hlr {

enum class ErrorKind {
  // exactlin
  NotStable,
  DimensionMismatch,
  NotSemisimple,
  // modsym
  NotCoprime,
  UnsupportedWeight,
  LevelTooSmall,
  BadDivisor,
  MissingPrime,
  StructuralError,
  // zpr
  ZeroInput,
  DenominatorNotUnit,
  NonResidue,
  NotUnit,
  NoSolution,
  InvalidModulus,
  // levelraise
  InsufficientField,
  BoundTooSmall,
  EmptySpan,
  UnstableConstraint,
  InvalidInput,
  // cli
  SchemaError,
  RecursionViolation,
  UnknownLabel,
  CacheError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hlr
