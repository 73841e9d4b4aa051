#pragma once

#include <stdexcept>
#include <string>

namespace fastslow {

/// Assumption gate failure: the system violates (A1) or (A2) and downstream
/// analyses refuse to run on it.
struct AssumptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input outside the valid domain (e.g. tau outside the forcing domain).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unknown name in a registry lookup.
struct LookupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A bisection bracket whose endpoints do not straddle the sought event.
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Evaluation requested at a point where the reduced flow is singular.
struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Projection requested on the wrong side of the fold.
struct SideError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Step-size underflow in an integrator.
struct StiffnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Degenerate linear algebra (e.g. defective Jacobian at a folded node).
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A canard seeding section that shows no jump dichotomy.
struct SectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config-file schema violation.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fastslow
