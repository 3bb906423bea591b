#include "markovcomb/errors.hpp"

namespace mcomb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidCategorySet: return "InvalidCategorySet";
    case ErrorCode::InvalidMapping: return "InvalidMapping";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::CodomainMismatch: return "CodomainMismatch";
    case ErrorCode::ZeroAggregate: return "ZeroAggregate";
    case ErrorCode::NotConsistent: return "NotConsistent";
    case ErrorCode::NotMetaConsistent: return "NotMetaConsistent";
    case ErrorCode::InconsistentPair: return "InconsistentPair";
    case ErrorCode::EmptyParameterSet: return "EmptyParameterSet";
    case ErrorCode::OutOfBox: return "OutOfBox";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NotADistribution: return "NotADistribution";
    case ErrorCode::InvalidCopula: return "InvalidCopula";
    case ErrorCode::NotBistochastic: return "NotBistochastic";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::MarginalsNotUniform: return "MarginalsNotUniform";
    case ErrorCode::InvalidTree: return "InvalidTree";
    case ErrorCode::InvalidCut: return "InvalidCut";
    case ErrorCode::NotBijection: return "NotBijection";
    case ErrorCode::ZeroBlock: return "ZeroBlock";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::ZeroLinearForm: return "ZeroLinearForm";
    case ErrorCode::InvalidAction: return "InvalidAction";
    case ErrorCode::NotCompatible: return "NotCompatible";
    case ErrorCode::TransportOutOfBox: return "TransportOutOfBox";
    case ErrorCode::UnknownVariant: return "UnknownVariant";
    case ErrorCode::EmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

}  // namespace mcomb
