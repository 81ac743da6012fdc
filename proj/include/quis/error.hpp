#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace quis {

enum class ErrorCode : std::uint8_t {
    // region keys / hierarchy
    WrongLength,
    NonDigit,
    ZeroState,
    InconsistentKey,
    MissingParent,
    ConflictingSite,
    UnknownSite,
    LevelTooCoarse,
    WrongLevel,
    // factor store
    UnknownFactor,
    DuplicateKey,
    LengthMismatch,
    UnsortedYears,
    NoValue,
    WrongAggregationMode,
    // expressions
    SyntaxError,
    EmptyExpression,
    DivisionByZero,
    MissingFactorValue,
    DomainError,
    // profiles / recommendation
    InvalidProfile,
    ProfileRejected,
    ProfileMismatch,
    UnknownProfile,
    UnknownChain,
    // statistics
    ConstantSeries,
    // io / misc
    Io,
    Usage,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class Severity : std::uint8_t { Warning, Error };

// A non-fatal finding from a validation pass. `subject` names the offending
// item (criterion id, file:line, factor/site pair) and may be empty.
struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    std::string subject;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::Error) return true;
    return false;
}

std::string format_diagnostic(const Diagnostic& d);

// Thrown when a batch operation (dataset load, profile admission) fails with
// one or more diagnostics attached.
class DiagnosticError : public Error {
public:
    DiagnosticError(ErrorCode code, std::vector<Diagnostic> diagnostics);

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

}  // namespace quis
