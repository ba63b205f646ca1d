#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace helm {

enum class ErrorCode {
  kParse,
  kValidation,
  kUnknownNode,
  kUnknownState,
  kInvalidEvidence,
  kInconsistentEvidence,
  kInvalidLink,
  kStaleRead,
  kNonConvergence,
  kTooLarge,
  kNotAskable,
  kAlreadyAnswered,
  kSessionStopped,
  kNotFound,
  kInvalidArgument,
};

// Stable machine-readable name, e.g. "inconsistent-evidence".
std::string_view code_name(ErrorCode code);

// Every failure raised by the library carries exactly one machine code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace helm
