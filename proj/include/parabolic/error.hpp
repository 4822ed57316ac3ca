#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parabolic {

enum class ErrorCode {
    PoleHit,
    Overflow,
    DegreeGuard,
    NoConvergence,
    InvalidMap,
    ParseError,
    FixedPointOnContour,
    NoQuadConvergence,
    AtParabolic,
    BoundaryRoot,
    TrackMatchFailure,
    AmbiguousTrack,
    Stalled,
    StepUnderflow,
    NotWellBehaved,
    CoordinateMismatch,
    ClosedGate,
    NotAdmissible,
    IndeterminateSum,
    InvalidCenter,
    InvalidTendency,
    EmptyWindow,
    EmptyCloud,
    NewtonDivergence,
    PotentialMismatch,
    InvalidArgument,
    ConfigError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::PoleHit: return "PoleHit";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::DegreeGuard: return "DegreeGuard";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::InvalidMap: return "InvalidMap";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::FixedPointOnContour: return "FixedPointOnContour";
        case ErrorCode::NoQuadConvergence: return "NoQuadConvergence";
        case ErrorCode::AtParabolic: return "AtParabolic";
        case ErrorCode::BoundaryRoot: return "BoundaryRoot";
        case ErrorCode::TrackMatchFailure: return "TrackMatchFailure";
        case ErrorCode::AmbiguousTrack: return "AmbiguousTrack";
        case ErrorCode::Stalled: return "Stalled";
        case ErrorCode::StepUnderflow: return "StepUnderflow";
        case ErrorCode::NotWellBehaved: return "NotWellBehaved";
        case ErrorCode::CoordinateMismatch: return "CoordinateMismatch";
        case ErrorCode::ClosedGate: return "ClosedGate";
        case ErrorCode::NotAdmissible: return "NotAdmissible";
        case ErrorCode::IndeterminateSum: return "IndeterminateSum";
        case ErrorCode::InvalidCenter: return "InvalidCenter";
        case ErrorCode::InvalidTendency: return "InvalidTendency";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::NewtonDivergence: return "NewtonDivergence";
        case ErrorCode::PotentialMismatch: return "PotentialMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Expression or config syntax error with a 1-based position.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& what)
        : Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace parabolic
