#pragma once

#include <stdexcept>
#include <string>

namespace bucktop {

/// Failure categories. The numeric values double as C API status codes and
/// CLI exit codes where the two overlap.
enum class ErrorKind : int {
  InvalidArgument = 1,
  Config = 2,
  Solver = 3,
  Io = 4,
  Internal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::InvalidArgument, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace bucktop
