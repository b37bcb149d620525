#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsid {

enum class ErrorCode {
    MalformedHeader,
    TruncatedFrame,
    MissingColumn,
    RowParseError,
    UnknownBenignClass,
    TooFewRecords,
    ShapeMismatch,
    ConcatSpatialMismatch,
    BatchTooSmall,
    ChecksumMismatch,
    VersionMismatch,
    ClassOutOfRange,
    DegenerateView,
    TrunkShapeMismatch,
    TrainableTrunk,
    EmptyDataset,
    ManifestMismatch,
    LengthMismatch,
    InvalidArgument,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedFrame: return "TruncatedFrame";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::RowParseError: return "RowParseError";
    case ErrorCode::UnknownBenignClass: return "UnknownBenignClass";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ConcatSpatialMismatch: return "ConcatSpatialMismatch";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ClassOutOfRange: return "ClassOutOfRange";
    case ErrorCode::DegenerateView: return "DegenerateView";
    case ErrorCode::TrunkShapeMismatch: return "TrunkShapeMismatch";
    case ErrorCode::TrainableTrunk: return "TrainableTrunk";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to a diagnostic and exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace bsid
