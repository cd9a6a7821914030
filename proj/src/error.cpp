#include "svrnn/error.hpp"

namespace svrnn {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kOutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kFormat: return "FORMAT";
    case ErrorCode::kNumeric: return "NUMERIC";
    case ErrorCode::kVocabularyMismatch: return "VOCABULARY_MISMATCH";
    case ErrorCode::kConfig: return "CONFIG";
  }
  return "UNKNOWN";
}

}  // namespace svrnn
