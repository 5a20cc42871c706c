#pragma once

#include <stdexcept>
#include <string>

namespace mito {

enum class ErrorCode {
  singular_matrix,
  invalid_index,
  bad_dimensions,
  invalid_gamma,
  shape_mismatch,
  non_finite_loss,
  bad_magic,
  version_mismatch,
  truncated_file,
  length_mismatch,
  degenerate_tile,
  insufficient_tissue,
  all_zero_scores,
  empty_ensemble,
  tile_geometry,
  no_tissue,
  bad_thresholds,
  degenerate_input,
  config_infeasible,
  bad_config,
  missing_input,
  precondition,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::singular_matrix: return "SingularMatrix";
    case ErrorCode::invalid_index: return "InvalidIndex";
    case ErrorCode::bad_dimensions: return "BadDimensions";
    case ErrorCode::invalid_gamma: return "InvalidGamma";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::non_finite_loss: return "NonFiniteLoss";
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::version_mismatch: return "VersionMismatch";
    case ErrorCode::truncated_file: return "TruncatedFile";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::degenerate_tile: return "DegenerateTile";
    case ErrorCode::insufficient_tissue: return "InsufficientTissue";
    case ErrorCode::all_zero_scores: return "AllZeroScores";
    case ErrorCode::empty_ensemble: return "EmptyEnsemble";
    case ErrorCode::tile_geometry: return "TileGeometryError";
    case ErrorCode::no_tissue: return "NoTissue";
    case ErrorCode::bad_thresholds: return "BadThresholds";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::config_infeasible: return "ConfigInfeasible";
    case ErrorCode::bad_config: return "BadConfig";
    case ErrorCode::missing_input: return "MissingInput";
    case ErrorCode::precondition: return "PreconditionViolated";
    case ErrorCode::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace mito
