#pragma once

#include <stdexcept>
#include <string>

namespace biomeval {

// Every failure mode the library can report. Codes map onto process exit
// codes via exit_code(): I/O problems are distinguished from validation
// problems so callers can script against the CLI.
enum class ErrorCode {
    // I/O
    MissingFile,
    IoError,
    // dataset validation
    InvalidManifest,
    DimensionMismatch,
    DuplicateIdentity,
    DuplicateVariation,
    NonFiniteComponent,
    ZeroNormVector,
    UnknownAttributeLabel,
    VariationCountMismatch,
    SingleIdentityDataset,
    UnknownReference,
    // pairing / scoring
    InsufficientVariations,
    TooManyPairs,
    OutOfRange,
    // statistics
    EmptyDistribution,
    EmptyScores,
    ZeroBins,
    ZeroTotalMass,
    BinCountMismatch,
    UnnormalizedInput,
    EmptyScoreSet,
    // simulation
    InvalidPlan,
    ImpossibleTruncation,
    // should never surface in a correct build
    Internal,
};

const char* to_string(ErrorCode code);

// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          message_(message) {}

    ErrorCode code() const noexcept { return code_; }

    // The description without the code prefix, for re-wrapping with context.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace biomeval
