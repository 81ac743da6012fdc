#include "quis/error.hpp"

namespace quis {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::WrongLength: return "WrongLength";
    case ErrorCode::NonDigit: return "NonDigit";
    case ErrorCode::ZeroState: return "ZeroState";
    case ErrorCode::InconsistentKey: return "InconsistentKey";
    case ErrorCode::MissingParent: return "MissingParent";
    case ErrorCode::ConflictingSite: return "ConflictingSite";
    case ErrorCode::UnknownSite: return "UnknownSite";
    case ErrorCode::LevelTooCoarse: return "LevelTooCoarse";
    case ErrorCode::WrongLevel: return "WrongLevel";
    case ErrorCode::UnknownFactor: return "UnknownFactor";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnsortedYears: return "UnsortedYears";
    case ErrorCode::NoValue: return "NoValue";
    case ErrorCode::WrongAggregationMode: return "WrongAggregationMode";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::EmptyExpression: return "EmptyExpression";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::MissingFactorValue: return "MissingFactorValue";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::ProfileRejected: return "ProfileRejected";
    case ErrorCode::ProfileMismatch: return "ProfileMismatch";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::UnknownChain: return "UnknownChain";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Usage: return "Usage";
    }
    return "Unknown";
}

std::string format_diagnostic(const Diagnostic& d) {
    std::string out = d.severity == Severity::Error ? "error" : "warning";
    out += " ";
    out += d.code;
    if (!d.subject.empty()) {
        out += " [";
        out += d.subject;
        out += "]";
    }
    if (!d.message.empty()) {
        out += ": ";
        out += d.message;
    }
    return out;
}

static std::string summarize(const std::vector<Diagnostic>& diags) {
    std::string msg = std::to_string(diags.size()) + " diagnostic(s)";
    if (!diags.empty()) msg += "; first: " + format_diagnostic(diags.front());
    return msg;
}

DiagnosticError::DiagnosticError(ErrorCode code, std::vector<Diagnostic> diagnostics)
    : Error(code, summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace quis
