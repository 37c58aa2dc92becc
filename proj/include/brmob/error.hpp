#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brmob {

enum class ErrorKind {
    NotPositiveDefinite,
    NotSymmetric,
    DimensionMismatch,
    OutOfRange,
    EmptySample,
    EmptyDataset,
    InsufficientSamples,
    SpecInvalid,
    EmptyInput,
    ConfigInvalid,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::EmptySample: return "EmptySample";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::SpecInvalid: return "SpecInvalid";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

inline void require(bool condition, ErrorKind kind, const char* what) {
    if (!condition) fail(kind, what);
}

}  // namespace brmob
