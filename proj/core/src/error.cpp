#include "rsport/error.hpp"

namespace rsport {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotSquare: return "NotSquare";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::NonZeroRowSum: return "NonZeroRowSum";
        case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
        case ErrorCode::Reducible: return "Reducible";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::SingularVolatility: return "SingularVolatility";
        case ErrorCode::InvalidUtility: return "InvalidUtility";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonPositiveA: return "NonPositiveA";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NonPositiveWealth: return "NonPositiveWealth";
        case ErrorCode::NonConcavePoint: return "NonConcavePoint";
        case ErrorCode::DegenerateQuantile: return "DegenerateQuantile";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::TooManyRejectedPaths: return "TooManyRejectedPaths";
    }
    return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotSquare:
        case ErrorCode::NonFiniteInput:
        case ErrorCode::NonZeroRowSum:
        case ErrorCode::NegativeOffDiagonal:
        case ErrorCode::Reducible:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::NotPositiveDefinite:
        case ErrorCode::SingularVolatility:
        case ErrorCode::InvalidUtility:
        case ErrorCode::InvalidArgument:
        case ErrorCode::DegenerateQuantile:
            return true;
        default:
            return false;
    }
}

}  // namespace rsport
