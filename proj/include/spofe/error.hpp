#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spofe {

enum class ErrorKind {
  Parse,
  EmptyInput,
  Io,
  Config,
  Bounds,
  DegenerateInput,
  Numerical,
  NonConvergence,
  InsufficientData,
  DegenerateDistribution,
};

const char* to_string(ErrorKind kind);

// 1 for numerical/statistical failures, 2 for usage and IO problems.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Row and column are 1-based; row counts data rows, not the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& message);
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& message, Eigen::VectorXd best)
      : Error(ErrorKind::NonConvergence, message), best_(std::move(best)) {}
  const Eigen::VectorXd& best_iterate() const noexcept { return best_; }

 private:
  Eigen::VectorXd best_;
};

// Raised by the pipeline orchestrator; names the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& message)
      : Error(kind, message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace spofe
