#pragma once

#include <stdexcept>
#include <string>

namespace damperopt {

enum class ErrorCode {
  InvalidDimension,
  InvalidPosition,
  InvalidModel,
  InvalidBand,
  InvalidParameter,
  ShapeMismatch,
  Degenerate,
  Instability,
  NoAdmissiblePosition,
  Config,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid dimension";
    case ErrorCode::InvalidPosition: return "invalid position";
    case ErrorCode::InvalidModel: return "invalid model";
    case ErrorCode::InvalidBand: return "invalid band";
    case ErrorCode::InvalidParameter: return "invalid parameter";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::Degenerate: return "non-Hurwitz or degenerate system";
    case ErrorCode::Instability: return "integration instability";
    case ErrorCode::NoAdmissiblePosition: return "no admissible position";
    case ErrorCode::Config: return "configuration error";
  }
  return "unknown error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace damperopt
