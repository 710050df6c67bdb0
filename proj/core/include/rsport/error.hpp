#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsport {

enum class ErrorCode {
    // market
    NotSquare,
    NonFiniteInput,
    NonZeroRowSum,
    NegativeOffDiagonal,
    Reducible,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularVolatility,
    // utility / solver
    InvalidUtility,
    InvalidArgument,
    NonPositiveA,
    NonFinite,
    OutOfRange,
    // policy
    NonPositiveWealth,
    NonConcavePoint,
    // simulation
    DegenerateQuantile,
    NonFiniteState,
    TooManyRejectedPaths,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for codes raised while validating user-supplied inputs, false for
/// failures that occur during a numerical computation.
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rsport
