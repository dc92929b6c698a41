#include "mopdil/error.hpp"

namespace mopdil {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroNormVector: return "ZeroNormVector";
        case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
        case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::MissingClass: return "MissingClass";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::EmptyMixture: return "EmptyMixture";
        case ErrorCode::MissingHeads: return "MissingHeads";
        case ErrorCode::IncompleteMatrix: return "IncompleteMatrix";
        case ErrorCode::TooFewDomains: return "TooFewDomains";
        case ErrorCode::InfeasibleGeometry: return "InfeasibleGeometry";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
        case ErrorCode::DuplicateDomain: return "DuplicateDomain";
        case ErrorCode::OutOfOrderDomain: return "OutOfOrderDomain";
    }
    return "Unknown";
}

}  // namespace mopdil
