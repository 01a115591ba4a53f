#include "biomeval/error.hpp"

namespace biomeval {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidManifest: return "InvalidManifest";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DuplicateIdentity: return "DuplicateIdentity";
        case ErrorCode::DuplicateVariation: return "DuplicateVariation";
        case ErrorCode::NonFiniteComponent: return "NonFiniteComponent";
        case ErrorCode::ZeroNormVector: return "ZeroNormVector";
        case ErrorCode::UnknownAttributeLabel: return "UnknownAttributeLabel";
        case ErrorCode::VariationCountMismatch: return "VariationCountMismatch";
        case ErrorCode::SingleIdentityDataset: return "SingleIdentityDataset";
        case ErrorCode::UnknownReference: return "UnknownReference";
        case ErrorCode::InsufficientVariations: return "InsufficientVariations";
        case ErrorCode::TooManyPairs: return "TooManyPairs";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::EmptyDistribution: return "EmptyDistribution";
        case ErrorCode::EmptyScores: return "EmptyScores";
        case ErrorCode::ZeroBins: return "ZeroBins";
        case ErrorCode::ZeroTotalMass: return "ZeroTotalMass";
        case ErrorCode::BinCountMismatch: return "BinCountMismatch";
        case ErrorCode::UnnormalizedInput: return "UnnormalizedInput";
        case ErrorCode::EmptyScoreSet: return "EmptyScoreSet";
        case ErrorCode::InvalidPlan: return "InvalidPlan";
        case ErrorCode::ImpossibleTruncation: return "ImpossibleTruncation";
        case ErrorCode::Internal: return "Internal";
    }
    return "Internal";
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile:
        case ErrorCode::IoError:
            return 2;
        case ErrorCode::Internal:
            return 3;
        default:
            return 1;
    }
}

} // namespace biomeval
