#include "spofe/error.hpp"

namespace spofe {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Bounds: return "BoundsError";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::Numerical: return "NumericalError";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateDistribution: return "DegenerateDistribution";
  }
  return "Error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::EmptyInput:
    case ErrorKind::Io:
    case ErrorKind::Config:
    case ErrorKind::Bounds:
      return 2;
    default:
      return 1;
  }
}

ParseError::ParseError(std::size_t row, std::size_t col, const std::string& message)
    : Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " + std::to_string(col) +
                                  ": " + message),
      row_(row),
      col_(col) {}

}  // namespace spofe
