#include "hlr/error.hpp"

namespace hlr {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotStable: return "NotStable";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSemisimple: return "NotSemisimple";
    case ErrorKind::NotCoprime: return "NotCoprime";
    case ErrorKind::UnsupportedWeight: return "UnsupportedWeight";
    case ErrorKind::LevelTooSmall: return "LevelTooSmall";
    case ErrorKind::BadDivisor: return "BadDivisor";
    case ErrorKind::MissingPrime: return "MissingPrime";
    case ErrorKind::StructuralError: return "StructuralError";
    case ErrorKind::ZeroInput: return "ZeroInput";
    case ErrorKind::DenominatorNotUnit: return "DenominatorNotUnit";
    case ErrorKind::NonResidue: return "NonResidue";
    case ErrorKind::NotUnit: return "NotUnit";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::InvalidModulus: return "InvalidModulus";
    case ErrorKind::InsufficientField: return "InsufficientField";
    case ErrorKind::BoundTooSmall: return "BoundTooSmall";
    case ErrorKind::EmptySpan: return "EmptySpan";
    case ErrorKind::UnstableConstraint: return "UnstableConstraint";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::RecursionViolation: return "RecursionViolation";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::CacheError: return "CacheError";
  }
  return "Unknown";
}

}  // namespace hlr
