#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace usmask {

enum class ErrorCode {
  kPrecondition,
  kEmptyAfterClamp,
  kNoGroundTruth,
  kConstantImage,
  kNoBoundaryData,
  kStreamInconsistency,
  kParse,
  kSchema,
  kIo,
  kBadMagic,
  kUnsupportedVersion,
  kOversize,
  kTruncated,
  kMalformed,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw Error(ErrorCode::kPrecondition, what);
}

}  // namespace usmask
