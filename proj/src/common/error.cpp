#include "cbai/error.hpp"

namespace cbai {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidState: return "InvalidState";
        case ErrorCode::ZeroSeed: return "ZeroSeed";
        case ErrorCode::DegenerateSequence: return "DegenerateSequence";
        case ErrorCode::ShiftCollision: return "ShiftCollision";
        case ErrorCode::BadStimulusId: return "BadStimulusId";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::AlreadyDecided: return "AlreadyDecided";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EmptyQuestion: return "EmptyQuestion";
        case ErrorCode::InvalidIndex: return "InvalidIndex";
        case ErrorCode::Ended: return "Ended";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::EmptyCompletion: return "EmptyCompletion";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::BindFailure: return "BindFailure";
    }
    return "Unknown";
}

}  // namespace cbai
