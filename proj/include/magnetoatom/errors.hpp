#pragma once

#include <stdexcept>
#include <string>

namespace magnetoatom {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-positive mass/charge or otherwise malformed physical input.
struct InvalidParameter : Error {
    using Error::Error;
};

/// Two systems cannot be related: |mu2 - mu1| differs between them.
struct ScalingIncompatible : Error {
    using Error::Error;
};

/// Operation requires B > 0 (no magnetic well at zero field).
struct DegenerateField : Error {
    using Error::Error;
};

/// Asymptotic expansion requested below the saddle momentum.
struct OutOfRegime : Error {
    using Error::Error;
};

/// Coulomb point (0,0) passed to a pointwise potential evaluation.
struct OriginSingularity : Error {
    using Error::Error;
};

/// Perturbative order outside the implemented closed-form set.
struct UnsupportedOrder : Error {
    using Error::Error;
};

/// Trial-function parameter vector violates its invariants.
struct InvalidTrial : Error {
    using Error::Error;
};

/// Quadrature failed to reach the requested tolerance.
struct QuadratureError : Error {
    using Error::Error;
};

/// Finite-difference grid would exceed the memory budget.
struct GridTooLarge : Error {
    using Error::Error;
};

/// Scan did not bracket the requested transition.
struct NotBracketed : Error {
    using Error::Error;
};

} // namespace magnetoatom
