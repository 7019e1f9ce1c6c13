#ifndef SUBGROUP_ERROR_HPP
#define SUBGROUP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

/**
 * @file error.hpp
 * @brief Error codes shared by every module.
 */

namespace subgroup {

enum class ErrorCode {
    NegativeValue,
    SingleClass,
    UnknownReferenceLevel,
    AllRowsDropped,
    FileNotFound,
    HeaderMismatch,
    ParseError,
    UnknownCategoryLevel,
    UnknownProfile,
    InvalidSchema,
    InvalidSpec,
    SchemaMismatch,
    KTooLarge,
    EmptyDataset,
    NoWithinPairs,
    SingleCluster,
    InsufficientRows,
    SingularCovariance,
    TooFewRows,
    TooManyFeatures,
    Separation,
    RankDeficient,
    OutOfRange,
    InvalidConfig,
    ModelNotFound,
    Io
};

inline constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NegativeValue: return "NegativeValue";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::UnknownReferenceLevel: return "UnknownReferenceLevel";
        case ErrorCode::AllRowsDropped: return "AllRowsDropped";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::HeaderMismatch: return "HeaderMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnknownCategoryLevel: return "UnknownCategoryLevel";
        case ErrorCode::UnknownProfile: return "UnknownProfile";
        case ErrorCode::InvalidSchema: return "InvalidSchema";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::NoWithinPairs: return "NoWithinPairs";
        case ErrorCode::SingleCluster: return "SingleCluster";
        case ErrorCode::InsufficientRows: return "InsufficientRows";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::TooManyFeatures: return "TooManyFeatures";
        case ErrorCode::Separation: return "Separation";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::ModelNotFound: return "ModelNotFound";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/**
 * Exception type thrown by all library operations.
 * `code()` identifies the failure class, `what()` carries the human-readable detail.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}

#endif
