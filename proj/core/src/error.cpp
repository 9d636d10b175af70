#include "kimatch/error.hpp"

namespace kimatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::EmptyLexicon: return "EmptyLexicon";
    case ErrorCode::EmbedderUnavailable: return "EmbedderUnavailable";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::MissingComponent: return "MissingComponent";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::NoConditions: return "NoConditions";
    case ErrorCode::NoIdleSP: return "NoIdleSP";
    case ErrorCode::RejectedNotSS: return "RejectedNotSS";
    case ErrorCode::UnknownSS: return "UnknownSS";
    case ErrorCode::UnknownSP: return "UnknownSP";
    case ErrorCode::NoModel: return "NoModel";
    case ErrorCode::SPBusy: return "SPBusy";
    case ErrorCode::NotRecommended: return "NotRecommended";
    case ErrorCode::BadConfidence: return "BadConfidence";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace kimatch
