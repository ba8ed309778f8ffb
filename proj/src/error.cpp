#include "laprep/error.hpp"

namespace laprep {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonRectangular: return "NonRectangular";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NoOpenCells: return "NoOpenCells";
    case ErrorCode::InvalidMaze: return "InvalidMaze";
    case ErrorCode::NoStationary: return "NoStationary";
    case ErrorCode::UnreachableState: return "UnreachableState";
    case ErrorCode::RankExceeded: return "RankExceeded";
    case ErrorCode::LinearSolveFailed: return "LinearSolveFailed";
    case ErrorCode::EmptyBuffer: return "EmptyBuffer";
    case ErrorCode::SamplingStuck: return "SamplingStuck";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace laprep
