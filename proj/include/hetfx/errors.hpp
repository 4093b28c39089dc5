#pragma once

#include <stdexcept>
#include <string>

namespace hetfx {

// Machine-readable failure categories. Each maps to a process exit code:
// input/validation problems (2), statistical degeneracies discovered during
// estimation (3), and internal invariant violations (4).
enum class ErrorCode {
    // input / validation
    NonBinaryTreatment,
    NonBinaryInstrument,
    NonFiniteValue,
    DegenerateInstrument,
    UnsupportedCovariateMix,
    EmptyInput,
    DimensionMismatch,
    InvalidAlpha,
    MissingColumn,
    ParseError,
    IoError,
    // statistical degeneracy
    EmptyCell,
    WeakInstrument,
    EmptyArm,
    ZeroWeightSum,
    EmptyMask,
    MissingCell,
    DegenerateBandwidth,
    DensityFloor,
    // internal
    Internal,
};

constexpr const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NonBinaryTreatment: return "NonBinaryTreatment";
        case ErrorCode::NonBinaryInstrument: return "NonBinaryInstrument";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::DegenerateInstrument: return "DegenerateInstrument";
        case ErrorCode::UnsupportedCovariateMix: return "UnsupportedCovariateMix";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidAlpha: return "InvalidAlpha";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::EmptyCell: return "EmptyCell";
        case ErrorCode::WeakInstrument: return "WeakInstrument";
        case ErrorCode::EmptyArm: return "EmptyArm";
        case ErrorCode::ZeroWeightSum: return "ZeroWeightSum";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::MissingCell: return "MissingCell";
        case ErrorCode::DegenerateBandwidth: return "DegenerateBandwidth";
        case ErrorCode::DensityFloor: return "DensityFloor";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

// Exit code contract used by the CLI: 0 success, 2 input/validation error,
// 3 statistical degeneracy, 4 internal error.
constexpr int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::NonBinaryTreatment:
        case ErrorCode::NonBinaryInstrument:
        case ErrorCode::NonFiniteValue:
        case ErrorCode::DegenerateInstrument:
        case ErrorCode::UnsupportedCovariateMix:
        case ErrorCode::EmptyInput:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::InvalidAlpha:
        case ErrorCode::MissingColumn:
        case ErrorCode::ParseError:
        case ErrorCode::IoError:
            return 2;
        case ErrorCode::EmptyCell:
        case ErrorCode::WeakInstrument:
        case ErrorCode::EmptyArm:
        case ErrorCode::ZeroWeightSum:
        case ErrorCode::EmptyMask:
        case ErrorCode::MissingCell:
        case ErrorCode::DegenerateBandwidth:
        case ErrorCode::DensityFloor:
            return 3;
        case ErrorCode::Internal:
            return 4;
    }
    return 4;
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return exit_code_for(code_); }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace hetfx
