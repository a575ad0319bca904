#include "fluxbench/error.hpp"

namespace fluxbench {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Usage: return "Usage";
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateKey: return "DuplicateKey";
        case ErrorCode::UnknownSite: return "UnknownSite";
        case ErrorCode::NoEligibleSites: return "NoEligibleSites";
        case ErrorCode::TooFewSites: return "TooFewSites";
        case ErrorCode::NoValidTa: return "NoValidTa";
        case ErrorCode::EmptyTraining: return "EmptyTraining";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptyValidation: return "EmptyValidation";
        case ErrorCode::PoolTooSmall: return "PoolTooSmall";
        case ErrorCode::AllTrimmed: return "AllTrimmed";
        case ErrorCode::EmptySupport: return "EmptySupport";
        case ErrorCode::WrongScale: return "WrongScale";
        case ErrorCode::NoRetainedYears: return "NoRetainedYears";
        case ErrorCode::EmptyDomain: return "EmptyDomain";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::ZeroReference: return "ZeroReference";
        case ErrorCode::CellMismatch: return "CellMismatch";
        case ErrorCode::NoCoverage: return "NoCoverage";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace fluxbench
