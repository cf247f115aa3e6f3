#include "bbo/errors.hpp"

namespace bbo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedConfig: return "MalformedConfig";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::ZHfOutOfSpace: return "ZHfOutOfSpace";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InfeasibleSampling: return "InfeasibleSampling";
    case ErrorCode::NotAPermutation: return "NotAPermutation";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NotAdditive: return "NotAdditive";
    case ErrorCode::NotProductKernel: return "NotProductKernel";
    case ErrorCode::BadGroupIndex: return "BadGroupIndex";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::GridMissingZhf: return "GridMissingZhf";
    case ErrorCode::OutOfSpace: return "OutOfSpace";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::UnknownBenchmark: return "UnknownBenchmark";
    case ErrorCode::UnknownQuery: return "UnknownQuery";
    case ErrorCode::WorkerFailure: return "WorkerFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace bbo
