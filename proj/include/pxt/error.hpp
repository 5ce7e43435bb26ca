#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pxt {

enum class ErrorCode {
  // corpus
  MalformedRecord,
  DuplicateId,
  UnknownColumn,
  UnknownTopicColumn,
  NonBinaryLabel,
  // classify
  TemplatePlaceholderMissing,
  UnknownLabel,
  EmptyResponse,
  BackendUnavailable,
  ParseFailed,
  UnredactedText,
  // eval
  LengthMismatch,
  EmptyInput,
  TooFewRuns,
  AnnotatorCountMismatch,
  // assoc
  DegenerateTable,
  ConstantInput,
  SingleGroup,
  SeparationDetected,
  OutOfRange,
  // cli
  ConfigInvalid,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a code; loaders also attach
// the offending file and 1-based line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Error(ErrorCode code, const std::string& message, std::string file, std::size_t line)
      : std::runtime_error(std::string(to_string(code)) + ": " + file + ":" + std::to_string(line) +
                           ": " + message),
        code_(code),
        file_(std::move(file)),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string file_;
  std::size_t line_ = 0;
};

}  // namespace pxt
