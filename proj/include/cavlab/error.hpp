#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cavlab {

enum class ErrorCode {
    ClearanceViolation,
    EmptyCavity,
    NegativeRadius,
    FluidDisconnected,
    BadArity,
    BadGrid,
    HypothesisViolation,
    Unsupported,
    EmptyGamma,
    UnvalidatedSpec,
    InvalidSpec,
    CollarOverlapsCavity,
    SupportTooClose,
    SolverDiverged,
    BreakpointMisaligned,
    RegionKindMismatch,
    ShapeMismatch,
    ConfigParse,
    MissingReference,
    BadAxis,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying one of the error codes above. The message always starts
/// with the upper-case code name so CLI diagnostics stay greppable.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ClearanceViolation: return "CLEARANCE_VIOLATION";
        case ErrorCode::EmptyCavity: return "EMPTY_CAVITY";
        case ErrorCode::NegativeRadius: return "NEGATIVE_RADIUS";
        case ErrorCode::FluidDisconnected: return "FLUID_DISCONNECTED";
        case ErrorCode::BadArity: return "BAD_ARITY";
        case ErrorCode::BadGrid: return "BAD_GRID";
        case ErrorCode::HypothesisViolation: return "HYPOTHESIS_VIOLATION";
        case ErrorCode::Unsupported: return "UNSUPPORTED";
        case ErrorCode::EmptyGamma: return "EMPTY_GAMMA";
        case ErrorCode::UnvalidatedSpec: return "UNVALIDATED_SPEC";
        case ErrorCode::InvalidSpec: return "INVALID_SPEC";
        case ErrorCode::CollarOverlapsCavity: return "COLLAR_OVERLAPS_CAVITY";
        case ErrorCode::SupportTooClose: return "SUPPORT_TOO_CLOSE";
        case ErrorCode::SolverDiverged: return "SOLVER_DIVERGED";
        case ErrorCode::BreakpointMisaligned: return "BREAKPOINT_MISALIGNED";
        case ErrorCode::RegionKindMismatch: return "REGION_KIND_MISMATCH";
        case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
        case ErrorCode::ConfigParse: return "CONFIG_PARSE";
        case ErrorCode::MissingReference: return "MISSING_REFERENCE";
        case ErrorCode::BadAxis: return "BAD_AXIS";
    }
    return "UNKNOWN";
}

}  // namespace cavlab
