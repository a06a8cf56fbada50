#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmdgeom {

enum class ErrorCode {
  InvalidInput,
  PointBehindCamera,
  DegenerateRay,
  Diverged,
  FixationBehindEye,
  InconsistentViewer,
  WrongCondition,
  DegenerateData,
  MissingCondition,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hmdgeom
