#pragma once

#include <stdexcept>
#include <string>

namespace lookplan {

// Failure classes map to CLI exit codes: validation -> 2, data -> 3,
// divergence -> 4.
enum class ErrorKind { Validation, Data, Divergence };

enum class ErrorCode {
  // validation
  InvalidConfig,
  NonOrthonormalRotation,
  ScannerFrame,
  ShapeMismatch,
  StaleCache,
  UnitMismatch,
  UnknownCondition,
  VocabularyOverflow,
  EmptyFit,
  UnknownElement,
  UnknownTask,
  EmptyGrid,
  InvalidTrainConfig,
  MissingTransform,
  DecreasingBreakpoints,
  ObstacleOutsideRoom,
  // data
  IoFailure,
  ParseError,
  EmptyCloud,
  SchemaViolation,
  DanglingElement,
  DegenerateCorrespondences,
  DegenerateVertices,
  NoFloorOrTempPoints,
  NoMetricsBeforeDate,
  AmbiguousCondition,
  DuplicateDate,
  SeriesTooShort,
  InsufficientWindows,
  InsufficientHistory,
  StaleCheckpoint,
  // divergence
  Diverged,
};

const char* error_code_name(ErrorCode code);
ErrorKind error_kind(ErrorCode code);
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorKind kind() const { return error_kind(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace lookplan
