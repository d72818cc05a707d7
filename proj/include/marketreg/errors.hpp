#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace marketreg {

enum class ErrorCode {
    NonPositivePrice,
    InsufficientData,
    MalformedRow,
    DuplicateDate,
    EmptySeries,
    UnknownColumn,
    InvalidConfig,
    InvalidSeries,
    InvalidArgument,
    DegenerateX,
    DegenerateFit,
    DegenerateInput,
    NoVolumeData,
    PathRejectionLimit,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateDate: return "DuplicateDate";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::UnknownColumn: return "UnknownColumn";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidSeries: return "InvalidSeries";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DegenerateX: return "DegenerateX";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::NoVolumeData: return "NoVolumeData";
        case ErrorCode::PathRejectionLimit: return "PathRejectionLimit";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
/// Ingest errors tied to a physical line also carry its 1-based number
/// (the header is line 1).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(format(code, detail, line)), code_(code), line_(line) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::optional<std::size_t> line() const noexcept { return line_; }

    /// True for errors caused by the input data or configuration rather
    /// than by a numerical estimation step.
    [[nodiscard]] bool is_input_error() const noexcept {
        switch (code_) {
            case ErrorCode::MalformedRow:
            case ErrorCode::DuplicateDate:
            case ErrorCode::EmptySeries:
            case ErrorCode::UnknownColumn:
            case ErrorCode::InvalidConfig:
            case ErrorCode::InvalidSeries:
            case ErrorCode::InvalidArgument:
            case ErrorCode::Io:
                return true;
            default:
                return false;
        }
    }

private:
    static std::string format(ErrorCode code, const std::string& detail, std::optional<std::size_t> line) {
        std::string out(to_string(code));
        if (line) out += "(line " + std::to_string(*line) + ")";
        if (!detail.empty()) out += ": " + detail;
        return out;
    }

    ErrorCode code_;
    std::optional<std::size_t> line_;
};

}  // namespace marketreg
