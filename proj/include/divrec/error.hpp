#pragma once

#include <stdexcept>
#include <string>

namespace divrec {

enum class ErrorKind {
    // data
    MalformedRow,
    EmptyCatalog,
    EmptyTrainSplit,
    // prompt codec
    KOutOfRange,
    NoRecognizableGenre,
    EmptyTargets,
    WrongGenreCount,
    TrailMismatch,
    IoFailure,
    // augmentation
    TaxonomyExhausted,
    DistributionGap,
    // backend
    Transport,
    BadResponse,
    Timeout,
    UnknownSequence,
    // grounding
    ProviderFailure,
    DimensionMismatch,
    EmptyIndex,
    CatalogTooSmall,
    // metrics
    UnknownItem,
    EmptyInput,
    // pipeline / cli
    StageFailure,
    ConfigError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

} // namespace divrec
