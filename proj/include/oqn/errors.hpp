#pragma once

#include <stdexcept>
#include <string>

namespace oqn {

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    UnknownProblem,
    InvalidDim,
    MissingValueOracle,
    InvalidStep,
    DimTooLargeForDenseOracle,
    NonUnitStart,
    InvalidProbability,
    InvalidDelta,
    OutsideBall,
    IterBudgetTooSmall,
    CertificateFailure,
    NonPositiveRadius,
    ZeroL2,
    NoGapEstimate,
    StationaryStart,
    InvalidParams,
    UnknownLevel,
    DimTooLarge,
    ConfigError,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::UnknownProblem: return "UnknownProblem";
        case ErrorCode::InvalidDim: return "InvalidDim";
        case ErrorCode::MissingValueOracle: return "MissingValueOracle";
        case ErrorCode::InvalidStep: return "InvalidStep";
        case ErrorCode::DimTooLargeForDenseOracle: return "DimTooLargeForDenseOracle";
        case ErrorCode::NonUnitStart: return "NonUnitStart";
        case ErrorCode::InvalidProbability: return "InvalidProbability";
        case ErrorCode::InvalidDelta: return "InvalidDelta";
        case ErrorCode::OutsideBall: return "OutsideBall";
        case ErrorCode::IterBudgetTooSmall: return "IterBudgetTooSmall";
        case ErrorCode::CertificateFailure: return "CertificateFailure";
        case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
        case ErrorCode::ZeroL2: return "ZeroL2";
        case ErrorCode::NoGapEstimate: return "NoGapEstimate";
        case ErrorCode::StationaryStart: return "StationaryStart";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::UnknownLevel: return "UnknownLevel";
        case ErrorCode::DimTooLarge: return "DimTooLarge";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace oqn
