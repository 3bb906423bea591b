#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcomb {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  InvalidCategorySet,
  InvalidMapping,
  IndexMismatch,
  CodomainMismatch,
  ZeroAggregate,
  NotConsistent,
  NotMetaConsistent,
  InconsistentPair,
  EmptyParameterSet,
  OutOfBox,
  NegativeEntry,
  NotNormalized,
  NotADistribution,
  InvalidCopula,
  NotBistochastic,
  SizeMismatch,
  MarginalsNotUniform,
  InvalidTree,
  InvalidCut,
  NotBijection,
  ZeroBlock,
  AllZero,
  SupportViolation,
  ZeroLinearForm,
  InvalidAction,
  NotCompatible,
  TransportOutOfBox,
  UnknownVariant,
  EmptyInput,
};

std::string_view to_string(ErrorCode code);

// Every domain failure in the library is reported through this type; the
// code is stable and machine readable, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace mcomb
