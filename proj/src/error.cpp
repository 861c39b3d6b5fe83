#include "divrec/error.hpp"

namespace divrec {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::EmptyCatalog: return "EmptyCatalog";
        case ErrorKind::EmptyTrainSplit: return "EmptyTrainSplit";
        case ErrorKind::KOutOfRange: return "KOutOfRange";
        case ErrorKind::NoRecognizableGenre: return "NoRecognizableGenre";
        case ErrorKind::EmptyTargets: return "EmptyTargets";
        case ErrorKind::WrongGenreCount: return "WrongGenreCount";
        case ErrorKind::TrailMismatch: return "TrailMismatch";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::TaxonomyExhausted: return "TaxonomyExhausted";
        case ErrorKind::DistributionGap: return "DistributionGap";
        case ErrorKind::Transport: return "Transport";
        case ErrorKind::BadResponse: return "BadResponse";
        case ErrorKind::Timeout: return "Timeout";
        case ErrorKind::UnknownSequence: return "UnknownSequence";
        case ErrorKind::ProviderFailure: return "ProviderFailure";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyIndex: return "EmptyIndex";
        case ErrorKind::CatalogTooSmall: return "CatalogTooSmall";
        case ErrorKind::UnknownItem: return "UnknownItem";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::StageFailure: return "StageFailure";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace divrec
