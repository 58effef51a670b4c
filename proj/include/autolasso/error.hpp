#pragma once
#include <stdexcept>
#include <string>
#include <string_view>

namespace autolasso {

enum class ErrorKind
{
    ZeroVarianceColumn,
    NonFiniteInput,
    DegenerateResponse,
    InvalidConfig,
    MaxIterationsExceeded,
    SingularGram,
    MismatchedProblem,
    LengthMismatch,
    DimensionMismatch,
    InvalidRho,
    InvalidPattern,
    InvalidRange,
    NumericalFailure,
    NotPositiveDefinite,
    EigenFailure,
    NonFiniteLoss,
    WrongModelKind,
    VersionMismatch,
    CorruptFile,
    MalformedRow,
    Io,
};

inline constexpr std::string_view to_string(ErrorKind k)
{
    switch (k) {
        case ErrorKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::DegenerateResponse: return "DegenerateResponse";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::MaxIterationsExceeded: return "MaxIterationsExceeded";
        case ErrorKind::SingularGram: return "SingularGram";
        case ErrorKind::MismatchedProblem: return "MismatchedProblem";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidRho: return "InvalidRho";
        case ErrorKind::InvalidPattern: return "InvalidPattern";
        case ErrorKind::InvalidRange: return "InvalidRange";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::EigenFailure: return "EigenFailure";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::WrongModelKind: return "WrongModelKind";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::CorruptFile: return "CorruptFile";
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library. `kind()` identifies the condition,
/// the message carries the context (column index, line number, fold, ...).
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail)
        , kind_(kind)
        , detail_(detail)
    {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

/// Re-throws `e` with `context` prepended, keeping the kind.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context)
{
    throw Error(e.kind(), context + ": " + e.detail());
}

} // namespace autolasso
