#include "rssd/error.hpp"

namespace rssd {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kNotOnManifold: return "not on manifold";
    case ErrorCode::kRankDeficient: return "rank deficient";
    case ErrorCode::kBacktrackExhausted: return "backtrack exhausted";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kConfig: return "config error";
  }
  return "unknown error";
}

}  // namespace rssd
