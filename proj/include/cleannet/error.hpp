#pragma once

#include <stdexcept>
#include <string>

namespace cleannet {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor shapes disagree (inner dimensions, broadcast, record counts).
struct DimensionError : Error {
    using Error::Error;
};

/// Non-finite value produced by an op, or a degenerate input such as a
/// zero-norm vector fed to cosine.
struct NumericError : Error {
    using Error::Error;
};

/// API contract violated by the caller (e.g. backward on a non-scalar node).
struct ContractError : Error {
    using Error::Error;
};

/// Malformed or truncated input file.
struct FormatError : Error {
    using Error::Error;
};

/// Semantically invalid data (label out of range, bad fraction, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Impossible run configuration (no verified samples, n_holdout >= L, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Unknown class id or missing reference set.
struct LookupError : Error {
    using Error::Error;
};

/// Training produced a non-finite loss or gradient.
struct TrainingError : Error {
    using Error::Error;
};

}  // namespace cleannet
