#include "impedlab/error.hpp"

namespace impedlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::DiameterExceeded: return "DiameterExceeded";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::PatchTouchesDirichlet: return "PatchTouchesDirichlet";
    case ErrorCode::EmptyPatch: return "EmptyPatch";
    case ErrorCode::ArgumentOutOfRange: return "ArgumentOutOfRange";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorCode::PointInsideObstacle: return "PointInsideObstacle";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::RadiusInsideObstacle: return "RadiusInsideObstacle";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::AllMasked: return "AllMasked";
    case ErrorCode::BallTouchesObstacle: return "BallTouchesObstacle";
    case ErrorCode::DegenerateMasses: return "DegenerateMasses";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ImpedanceOutOfBounds: return "ImpedanceOutOfBounds";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::StageFailed: return "StageFailed";
  }
  return "Unknown";
}

}  // namespace impedlab
