#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace laprep {

enum class ErrorCode {
  NonRectangular,
  Disconnected,
  NoOpenCells,
  InvalidMaze,
  NoStationary,
  UnreachableState,
  RankExceeded,
  LinearSolveFailed,
  EmptyBuffer,
  SamplingStuck,
  ShapeMismatch,
  NumericalFailure,
  MissingEmbedding,
  InvalidArgument,
  BadConfig,
  Io,
  Unsupported,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace laprep
