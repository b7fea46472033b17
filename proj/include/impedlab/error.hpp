#ifndef IMPEDLAB_ERROR_HPP
#define IMPEDLAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace impedlab {

enum class ErrorCode {
  NonPositiveRadius,
  DiameterExceeded,
  ResolutionTooCoarse,
  PatchTouchesDirichlet,
  EmptyPatch,
  ArgumentOutOfRange,
  CoincidentPoints,
  SingularSystem,
  TruncationInsufficient,
  PointInsideObstacle,
  GridMismatch,
  RadiusInsideObstacle,
  IllConditionedFit,
  AllMasked,
  BallTouchesObstacle,
  DegenerateMasses,
  InsufficientData,
  ImpedanceOutOfBounds,
  ConfigInvalid,
  StageFailed,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace impedlab

#endif
