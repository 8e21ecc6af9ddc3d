#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autoform {

// Root of every error the library raises. Callers that isolate per-item
// failures (pipelines) catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AUTOFORM_DEFINE_ERROR(Name, Base) \
  class Name : public Base {              \
   public:                                \
    using Base::Base;                     \
  }

// core
AUTOFORM_DEFINE_ERROR(MalformedWrapper, Error);
AUTOFORM_DEFINE_ERROR(InvariantViolation, Error);
AUTOFORM_DEFINE_ERROR(TemplateError, Error);

// llm
AUTOFORM_DEFINE_ERROR(BackendError, Error);
AUTOFORM_DEFINE_ERROR(BackendUnavailable, BackendError);
AUTOFORM_DEFINE_ERROR(RateLimited, BackendError);
AUTOFORM_DEFINE_ERROR(ContextOverflow, BackendError);
AUTOFORM_DEFINE_ERROR(ScriptExhausted, BackendError);

// provers
AUTOFORM_DEFINE_ERROR(ProverError, Error);
AUTOFORM_DEFINE_ERROR(ProverTimeout, ProverError);
AUTOFORM_DEFINE_ERROR(ProverCrashed, ProverError);
AUTOFORM_DEFINE_ERROR(SessionUnavailable, ProverError);
AUTOFORM_DEFINE_ERROR(LaunchFailed, ProverError);
AUTOFORM_DEFINE_ERROR(ProtocolError, ProverError);

// agents
AUTOFORM_DEFINE_ERROR(EmptyGeneration, Error);
AUTOFORM_DEFINE_ERROR(JudgmentUnparseable, Error);

// metrics
AUTOFORM_DEFINE_ERROR(EmptyInput, Error);
AUTOFORM_DEFINE_ERROR(MissingGroundTruth, Error);

// pipelines / cli
AUTOFORM_DEFINE_ERROR(PipelineFailed, Error);
AUTOFORM_DEFINE_ERROR(ConfigError, Error);
AUTOFORM_DEFINE_ERROR(DuplicateId, Error);

#undef AUTOFORM_DEFINE_ERROR

// An error tied to a location in a text file. `line` and `column` are
// 1-based; column 0 means "whole line".
class LocatedError : public Error {
 public:
  LocatedError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

class ParseError : public LocatedError {
 public:
  using LocatedError::LocatedError;
};

class MissingField : public LocatedError {
 public:
  using LocatedError::LocatedError;
};

class CorruptLog : public LocatedError {
 public:
  using LocatedError::LocatedError;
};

}  // namespace autoform
