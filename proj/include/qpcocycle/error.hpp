#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpc {

enum class ErrorKind {
    InvalidArgument,
    ScanTooLarge,
    NotCoprime,
    OutsideStrip,
    IdenticallySingular,
    Singular,
    AllSamplesSingular,
    NotUnimodular,
    ChainTooShort,
    NotDivisible,
    GateFailed,
    InconsistentDelta,
    PreconditionFailed,
    IdenticallyZero,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ScanTooLarge: return "ScanTooLarge";
    case ErrorKind::NotCoprime: return "NotCoprime";
    case ErrorKind::OutsideStrip: return "OutsideStrip";
    case ErrorKind::IdenticallySingular: return "IdenticallySingular";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::AllSamplesSingular: return "AllSamplesSingular";
    case ErrorKind::NotUnimodular: return "NotUnimodular";
    case ErrorKind::ChainTooShort: return "ChainTooShort";
    case ErrorKind::NotDivisible: return "NotDivisible";
    case ErrorKind::GateFailed: return "GateFailed";
    case ErrorKind::InconsistentDelta: return "InconsistentDelta";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::IdenticallyZero: return "IdenticallyZero";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what)
{
    if (!condition)
        throw Error(kind, what);
}

} // namespace qpc
