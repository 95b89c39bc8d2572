#ifndef HCTONE_ERROR_H_
#define HCTONE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hctone {

enum class ErrorCode {
  kInvalidFrame,
  kInvalidParameter,
  kInvalidInput,
  kOutOfDomain,
  kUnsupportedFormat,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported with this exception. `field` carries a
// JSON-pointer-like path (e.g. "params.harmonic_variation") when the error
// can be attributed to one input field.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const { return code_; }
  const std::string& field() const { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace hctone

#endif  // HCTONE_ERROR_H_
