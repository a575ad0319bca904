#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluxbench {

/// Failure categories surfaced by the library. Each maps to a distinct CLI exit code.
enum class ErrorCode {
    Usage = 2,
    Config,
    Io,
    MissingColumn,
    ParseError,
    DuplicateKey,
    UnknownSite,
    NoEligibleSites,
    TooFewSites,
    NoValidTa,
    EmptyTraining,
    DegenerateLabels,
    InvalidConfig,
    EmptyValidation,
    PoolTooSmall,
    AllTrimmed,
    EmptySupport,
    WrongScale,
    NoRetainedYears,
    EmptyDomain,
    EmptySet,
    ZeroReference,
    CellMismatch,
    NoCoverage,
    InvalidSpec,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

}  // namespace fluxbench
