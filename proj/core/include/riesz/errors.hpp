#pragma once

#include <stdexcept>
#include <string>

namespace riesz {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_geometry_error : error {
    using error::error;
};

struct degenerate_plate_error : error {
    using error::error;
};

struct invalid_condenser_error : error {
    using error::error;
};

struct dimension_mismatch_error : error {
    using error::error;
};

/// CSV / config parse failure; carries a human-readable location.
struct parse_error : error {
    using error::error;
};

/// An operation was invoked in a kernel mode for which it is not defined
/// (e.g. Kelvin identities under regularization, indefinite exact matrices
/// handed to the solver).
struct mode_misuse_error : error {
    using error::error;
};

/// Inversion pole hit: the pole maps to the point at infinity.
struct pole_error : error {
    using error::error;
};

struct infeasible_error : error {
    using error::error;
};

} // namespace riesz
