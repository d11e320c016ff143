#pragma once

#include <stdexcept>
#include <string>

namespace regcot {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int { kOk = 0, kConfig = 1, kData = 2, kInvariant = 3 };

/// Base of every error raised by the library. Each error knows which exit
/// code the CLI should report for it.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad configuration or usage (exit 1).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

/// Malformed or inconsistent input data (exit 2).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::kData, what) {}
};

/// Grid dimensions that do not agree.
class ShapeError : public DataError {
 public:
  explicit ShapeError(const std::string& what) : DataError("shape error: " + what) {}
};

/// Text file that failed to parse; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Missing policy row or response id.
class LookupError : public DataError {
 public:
  explicit LookupError(const std::string& what) : DataError("lookup error: " + what) {}
};

/// A hypothesis whose activation map has no component large enough.
/// The pipeline treats this as a skip rather than a failure.
class NoRegionError : public DataError {
 public:
  explicit NoRegionError(const std::string& hypothesis_id)
      : DataError("no region for hypothesis '" + hypothesis_id + "'"), hypothesis_id_(hypothesis_id) {}
  const std::string& hypothesis_id() const noexcept { return hypothesis_id_; }

 private:
  std::string hypothesis_id_;
};

/// Internal invariant or model-contract violation (exit 3).
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ExitCode::kInvariant, what) {}
};

class ContractViolation : public InvariantError {
 public:
  explicit ContractViolation(const std::string& what) : InvariantError("contract violation: " + what) {}
};

class StateError : public InvariantError {
 public:
  explicit StateError(const std::string& what) : InvariantError("state error: " + what) {}
};

class NumericError : public InvariantError {
 public:
  explicit NumericError(const std::string& what) : InvariantError("numeric error: " + what) {}
};

/// Wraps an error raised inside a pipeline stage, keeping the original exit code.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& context, const Error& cause)
      : Error(cause.code(), "[" + stage + "] " + context + ": " + cause.what()), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace regcot
