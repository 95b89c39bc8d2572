#include "hctone/error.h"

namespace hctone {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidFrame: return "invalid-frame";
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kOutOfDomain: return "out-of-domain";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace hctone
