#pragma once

#include <stdexcept>
#include <string>

namespace agrivote {

enum class ErrorCode {
    DuplicateClass,
    EmptyRegistry,
    UnknownClass,
    BadRatios,
    EmptyClass,
    BadImage,
    UnknownArch,
    ProviderError,
    BadBatch,
    EmptySplit,
    DivergedTraining,
    AlignmentError,
    DegenerateWeights,
    BadAccuracy,
    BadSubsetSize,
    LengthMismatch,
    BadLatency,
    InsufficientSamples,
    NoModels,
    CheckpointMismatch,
    IoError,
    ParseError,
    InvalidArgument,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateClass:      return "DuplicateClass";
        case ErrorCode::EmptyRegistry:       return "EmptyRegistry";
        case ErrorCode::UnknownClass:        return "UnknownClass";
        case ErrorCode::BadRatios:           return "BadRatios";
        case ErrorCode::EmptyClass:          return "EmptyClass";
        case ErrorCode::BadImage:            return "BadImage";
        case ErrorCode::UnknownArch:         return "UnknownArch";
        case ErrorCode::ProviderError:       return "ProviderError";
        case ErrorCode::BadBatch:            return "BadBatch";
        case ErrorCode::EmptySplit:          return "EmptySplit";
        case ErrorCode::DivergedTraining:    return "DivergedTraining";
        case ErrorCode::AlignmentError:      return "AlignmentError";
        case ErrorCode::DegenerateWeights:   return "DegenerateWeights";
        case ErrorCode::BadAccuracy:         return "BadAccuracy";
        case ErrorCode::BadSubsetSize:       return "BadSubsetSize";
        case ErrorCode::LengthMismatch:      return "LengthMismatch";
        case ErrorCode::BadLatency:          return "BadLatency";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::NoModels:            return "NoModels";
        case ErrorCode::CheckpointMismatch:  return "CheckpointMismatch";
        case ErrorCode::IoError:             return "IoError";
        case ErrorCode::ParseError:          return "ParseError";
        case ErrorCode::InvalidArgument:     return "InvalidArgument";
    }
    return "Unknown";
}

/// Library-wide exception carrying a stable error code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) raise(code, message);
}

}  // namespace agrivote
