#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbai {

enum class ErrorCode {
    InvalidArgument,
    InvalidState,
    ZeroSeed,
    DegenerateSequence,
    ShiftCollision,
    BadStimulusId,
    ShapeMismatch,
    OutOfRange,
    DegenerateLabels,
    AlreadyDecided,
    EmptyInput,
    EmptyQuestion,
    InvalidIndex,
    Ended,
    ProviderUnavailable,
    EmptyCompletion,
    EmptyCorpus,
    IoError,
    EmptyGroup,
    ParseError,
    BindFailure,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this type; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cbai
