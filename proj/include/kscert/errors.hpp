#pragma once

#include <stdexcept>
#include <string>

namespace kscert {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or contract-violating input (bad vectors, bad files, bad flags).
struct ValidationError : Error {
    using Error::Error;
};

/// An enumeration would exceed the configured word budget.
struct ResourceError : Error {
    using Error::Error;
};

/// A quantity falls outside the hypothesis range of an inequality
/// (e.g. c >= 1/3 for the entropy comparison bound, eps > 1/2 for the
/// flip step). Callers that gate on applicability catch this.
struct HypothesisError : Error {
    using Error::Error;
};

/// A computation method was requested for a measure kind it does not support.
struct UnsupportedMethodError : Error {
    using Error::Error;
};

}  // namespace kscert
