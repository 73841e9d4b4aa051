#pragma once

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "fastslow/geometry.hpp"
#include "fastslow/model.hpp"

namespace fastslow {

enum class SingularityKind {
    FoldedSaddle,
    FoldedNodeStable,
    FoldedNodeUnstable,
    FoldedFocusStable,
    FoldedFocusUnstable,
    FoldedSaddleNodeI,
    FoldedCentre,
};

std::string to_string(SingularityKind kind);

/// A folded singularity: a point on F where the reduced-flow numerator
/// vanishes, classified by the eigenvalues of the desingularized Jacobian.
/// b_sign and c_coeff are the normal-form data: b = det(J)/(2 eps) up to a
/// positive factor (so only the sign is stored) and c = tr(J).
struct FoldedSingularity {
    double x_star = 0.0;
    double y_star = 0.0;
    double tau_star = 0.0;
    double lambda_star = 0.0;
    std::complex<double> xi1;
    std::complex<double> xi2;
    std::optional<std::array<double, 2>> eigvec1;  // (x, tau) components, real case only
    std::optional<std::array<double, 2>> eigvec2;
    SingularityKind kind = SingularityKind::FoldedSaddle;
    int b_sign = 0;
    double c_coeff = 0.0;
};

struct CriticalRateReport {
    double epsilon_c_singular = 0.0;
    std::optional<double> epsilon_c_empirical;
    std::optional<double> E_delta;
    std::optional<double> order_exponent;
};

/// dx/dtau of the projected reduced system on S. Throws SingularityError
/// within 1e-12 of the fold.
double reduced_rhs(const SystemDefinition& sys, const ForcingProfile& forcing, double x,
                   double tau);

/// (dx/ds, dtau/ds) of the desingularized system on S; well defined on F.
std::pair<double, double> desing_rhs(const SystemDefinition& sys,
                                     const ForcingProfile& forcing, double x, double tau);

/// Exact Jacobian of desing_rhs in (x, tau), from polynomial partials and the
/// analytic forcing derivatives (uses d2lambda).
std::array<std::array<double, 2>, 2> desing_jacobian(const SystemDefinition& sys,
                                                     const ForcingProfile& forcing,
                                                     double x, double tau);

/// Classifies the folded-singularity candidate at tau_star (which must
/// satisfy the numerator condition to |residual| <= 1e-10 on F).
FoldedSingularity classify_folded_singularity(const SystemDefinition& sys,
                                              const ForcingProfile& forcing,
                                              double tau_star,
                                              std::pair<double, double> x_range = {-10.0,
                                                                                   10.0});

/// All folded singularities within the (truncated) tau domain, sorted by
/// tau_star. Dense scan at >= 2000 nodes with bracketing plus tangency
/// recovery, bisected to |dtau| <= 1e-12. An empty list is a valid result.
std::vector<FoldedSingularity> find_folded_singularities(
    const SystemDefinition& sys, const ForcingProfile& forcing,
    std::pair<double, double> x_range = {-10.0, 10.0});

/// Singular-limit critical rate: bisection on epsilon to width <= 1e-9 for
/// the infimum below which no folded singularity exists in the tau domain.
/// The bracket must be empty at the low end and nonempty at the high end.
CriticalRateReport estimate_critical_rate(const SystemDefinition& sys,
                                          const ForcingProfile& forcing_family,
                                          std::pair<double, double> eps_bracket,
                                          std::pair<double, double> x_range = {-10.0,
                                                                               10.0});

}  // namespace fastslow
