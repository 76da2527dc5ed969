#include "lookplan/errors.hpp"

namespace lookplan {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::NonOrthonormalRotation: return "NON_ORTHONORMAL_ROTATION";
    case ErrorCode::ScannerFrame: return "SCANNER_FRAME";
    case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::StaleCache: return "STALE_CACHE";
    case ErrorCode::UnitMismatch: return "UNIT_MISMATCH";
    case ErrorCode::UnknownCondition: return "UNKNOWN_CONDITION";
    case ErrorCode::VocabularyOverflow: return "VOCABULARY_OVERFLOW";
    case ErrorCode::EmptyFit: return "EMPTY_FIT";
    case ErrorCode::UnknownElement: return "UNKNOWN_ELEMENT";
    case ErrorCode::UnknownTask: return "UNKNOWN_TASK";
    case ErrorCode::EmptyGrid: return "EMPTY_GRID";
    case ErrorCode::InvalidTrainConfig: return "INVALID_TRAIN_CONFIG";
    case ErrorCode::MissingTransform: return "MISSING_TRANSFORM";
    case ErrorCode::DecreasingBreakpoints: return "DECREASING_BREAKPOINTS";
    case ErrorCode::ObstacleOutsideRoom: return "OBSTACLE_OUTSIDE_ROOM";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::EmptyCloud: return "EMPTY_CLOUD";
    case ErrorCode::SchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::DanglingElement: return "DANGLING_ELEMENT";
    case ErrorCode::DegenerateCorrespondences: return "DEGENERATE_CORRESPONDENCES";
    case ErrorCode::DegenerateVertices: return "DEGENERATE_VERTICES";
    case ErrorCode::NoFloorOrTempPoints: return "NO_FLOOR_OR_TEMP_POINTS";
    case ErrorCode::NoMetricsBeforeDate: return "NO_METRICS_BEFORE_DATE";
    case ErrorCode::AmbiguousCondition: return "AMBIGUOUS_CONDITION";
    case ErrorCode::DuplicateDate: return "DUPLICATE_DATE";
    case ErrorCode::SeriesTooShort: return "SERIES_TOO_SHORT";
    case ErrorCode::InsufficientWindows: return "INSUFFICIENT_WINDOWS";
    case ErrorCode::InsufficientHistory: return "INSUFFICIENT_HISTORY";
    case ErrorCode::StaleCheckpoint: return "STALE_CHECKPOINT";
    case ErrorCode::Diverged: return "DIVERGED";
  }
  return "UNKNOWN_ERROR";
}

ErrorKind error_kind(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::NonOrthonormalRotation:
    case ErrorCode::ScannerFrame:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::StaleCache:
    case ErrorCode::UnitMismatch:
    case ErrorCode::UnknownCondition:
    case ErrorCode::VocabularyOverflow:
    case ErrorCode::EmptyFit:
    case ErrorCode::UnknownElement:
    case ErrorCode::UnknownTask:
    case ErrorCode::EmptyGrid:
    case ErrorCode::InvalidTrainConfig:
    case ErrorCode::MissingTransform:
    case ErrorCode::DecreasingBreakpoints:
    case ErrorCode::ObstacleOutsideRoom:
      return ErrorKind::Validation;
    case ErrorCode::Diverged:
      return ErrorKind::Divergence;
    default:
      return ErrorKind::Data;
  }
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Divergence: return 4;
  }
  return 1;
}

}  // namespace lookplan
