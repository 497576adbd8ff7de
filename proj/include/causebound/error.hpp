#pragma once

#include <stdexcept>
#include <string>

namespace causebound {

enum class ErrorCode {
    UndefinedRatio,
    DegenerateConditioning,
    DegenerateTheta,
    ZeroCell,
    RetrospectiveDesign,
    ZeroRow,
    ZeroBaselineRisk,
    ParseError,
    ValidationError,
    InvalidSpec,
    TooFewDraws,
    EmptyGrid,
    EmptyInput,
    OutOfRange,
    NoExposedResponders,
    EmptyArm,
    IoError,
};

const char* to_string(ErrorCode code);

/// Exception carrying a stable error code alongside the human-readable message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace causebound
