#include "pxt/error.hpp"

namespace pxt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::UnknownTopicColumn: return "UnknownTopicColumn";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::TemplatePlaceholderMissing: return "TemplatePlaceholderMissing";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ParseFailed: return "ParseFailed";
    case ErrorCode::UnredactedText: return "UnredactedText";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewRuns: return "TooFewRuns";
    case ErrorCode::AnnotatorCountMismatch: return "AnnotatorCountMismatch";
    case ErrorCode::DegenerateTable: return "DegenerateTable";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::SingleGroup: return "SingleGroup";
    case ErrorCode::SeparationDetected: return "SeparationDetected";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace pxt
