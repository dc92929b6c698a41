#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mopdil {

enum class ErrorCode {
    DimensionMismatch,
    ZeroNormVector,
    NonPositiveVariance,
    NonPositiveSigma,
    NonFiniteValue,
    EmptyClass,
    MissingClass,
    TooFewSamples,
    EmptyMixture,
    MissingHeads,
    IncompleteMatrix,
    TooFewDomains,
    InfeasibleGeometry,
    InvalidArgument,
    ParseError,
    IndexOutOfRange,
    IoError,
    SchemaVersionMismatch,
    DuplicateDomain,
    OutOfOrderDomain,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for every data/contract failure; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mopdil
