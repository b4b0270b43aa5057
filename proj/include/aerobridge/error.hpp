#pragma once

#include <stdexcept>
#include <string>

namespace aerobridge {

enum class ErrorCode {
  kInvalidArgument = 1,
  kPitchSingularity,
  kNonPositiveGeometry,
  kOutOfRange,
  kUnreachableTarget,
  kEmptyTrace,
  kBehindCamera,
  kDegenerateCorners,
  kNumericalFailure,
  kNoCenterMarker,
  kHeadingUndefined,
  kNoFullSlot,
  kStateExplosion,
  kStuckBattery,
  kLatchLost,
  kConfigError,
  kIoError,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// C layer can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aerobridge
