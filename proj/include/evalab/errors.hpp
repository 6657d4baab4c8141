#pragma once

#include <stdexcept>
#include <string>

namespace evalab {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid values, malformed inputs, broken invariants. CLI maps these to exit 2.
struct ValidationError : Error {
    using Error::Error;
};

/// Structurally valid input whose exact computation exceeds a hard size cap.
/// CLI maps these to exit 3.
struct InfeasibleError : Error {
    using Error::Error;
};

struct NegativeProbability final : ValidationError {
    using ValidationError::ValidationError;
};
struct NotNormalized final : ValidationError {
    using ValidationError::ValidationError;
};
struct DuplicateLabel final : ValidationError {
    using ValidationError::ValidationError;
};
struct UnknownLabel final : ValidationError {
    using ValidationError::ValidationError;
};
struct DomainMismatch final : ValidationError {
    using ValidationError::ValidationError;
};
struct AlphaOutOfRange final : ValidationError {
    using ValidationError::ValidationError;
};
struct GammaOutOfRange final : ValidationError {
    using ValidationError::ValidationError;
};
struct NotBinary final : ValidationError {
    using ValidationError::ValidationError;
};
struct InvalidParameters final : ValidationError {
    using ValidationError::ValidationError;
};
struct CandidateNotInPair final : ValidationError {
    using ValidationError::ValidationError;
};
struct EmptyGrid final : ValidationError {
    using ValidationError::ValidationError;
};

struct SupportTooLarge final : InfeasibleError {
    using InfeasibleError::InfeasibleError;
};
struct DomainTooLarge final : InfeasibleError {
    using InfeasibleError::InfeasibleError;
};
struct TooManyFunctions final : InfeasibleError {
    using InfeasibleError::InfeasibleError;
};

} // namespace evalab
