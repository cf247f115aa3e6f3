#pragma once

#include <stdexcept>
#include <string>

namespace bbo {

enum class ErrorCode {
  MalformedConfig,
  InvalidBounds,
  UnknownKind,
  ZHfOutOfSpace,
  ArityMismatch,
  KindMismatch,
  InfeasibleSampling,
  NotAPermutation,
  SingularGram,
  SingularCovariance,
  NotAdditive,
  NotProductKernel,
  BadGroupIndex,
  EmptyData,
  EmptySet,
  GridMissingZhf,
  OutOfSpace,
  UnknownLabel,
  UnknownBenchmark,
  UnknownQuery,
  WorkerFailure,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace bbo
