#include "fastslow/desing.hpp"

#include <cmath>

#include "fastslow/rootfind.hpp"

namespace fastslow {

namespace {

constexpr double kEigZeroTol = 1e-8;   // |xi| below this counts as zero
constexpr double kResidualTol = 1e-10;  // numerator residual bound on F

struct OnManifold {
    double y, f_x, f_y, f_lam, g;
};

OnManifold on_manifold(const SystemDefinition& sys, double x, double lam) {
    const double y = manifold_y(sys, x, lam);
    return {y, sys.fx(x, y, lam), sys.fy(x, y, lam), sys.flam(x, y, lam),
            sys.g_at(x, y, lam)};
}

double numerator(const SystemDefinition& sys, const ForcingProfile& forcing, double x,
                 double tau) {
    const double lam = forcing.lambda(tau);
    const auto m = on_manifold(sys, x, lam);
    return m.g * m.f_y + forcing.epsilon() * m.f_lam * forcing.dlambda(tau);
}

}  // namespace

std::string to_string(SingularityKind kind) {
    switch (kind) {
        case SingularityKind::FoldedSaddle: return "folded-saddle";
        case SingularityKind::FoldedNodeStable: return "folded-node-stable";
        case SingularityKind::FoldedNodeUnstable: return "folded-node-unstable";
        case SingularityKind::FoldedFocusStable: return "folded-focus-stable";
        case SingularityKind::FoldedFocusUnstable: return "folded-focus-unstable";
        case SingularityKind::FoldedSaddleNodeI: return "folded-saddle-node-I";
        case SingularityKind::FoldedCentre: return "folded-centre";
    }
    return "?";
}

double reduced_rhs(const SystemDefinition& sys, const ForcingProfile& forcing, double x,
                   double tau) {
    const double lam = forcing.lambda(tau);
    const auto m = on_manifold(sys, x, lam);
    if (std::abs(m.f_x) <= 1e-12)
        throw SingularityError(
            "reduced flow evaluated on the fold; use the desingularized field");
    const double eps = forcing.epsilon();
    return -(m.g * m.f_y + eps * m.f_lam * forcing.dlambda(tau)) / (eps * m.f_x);
}

std::pair<double, double> desing_rhs(const SystemDefinition& sys,
                                     const ForcingProfile& forcing, double x, double tau) {
    const double lam = forcing.lambda(tau);
    const auto m = on_manifold(sys, x, lam);
    const double eps = forcing.epsilon();
    return {m.g * m.f_y + eps * m.f_lam * forcing.dlambda(tau), -eps * m.f_x};
}

std::array<std::array<double, 2>, 2> desing_jacobian(const SystemDefinition& sys,
                                                     const ForcingProfile& forcing,
                                                     double x, double tau) {
    const double eps = forcing.epsilon();
    const double lam = forcing.lambda(tau);
    const double lp = forcing.dlambda(tau);
    const double lpp = forcing.d2lambda(tau);
    const double y = manifold_y(sys, x, lam);

    const double f_x = sys.fx(x, y, lam);
    const double f_y = sys.fy(x, y, lam);
    const double f_l = sys.flam(x, y, lam);
    const double f_xx = sys.fxx(x, y, lam);
    const double f_xy = sys.fxy(x, y, lam);
    const double f_xl = sys.fxlam(x, y, lam);
    const double f_yy = sys.fyy(x, y, lam);
    const double f_yl = sys.fylam(x, y, lam);
    const double f_ll = sys.flamlam(x, y, lam);
    const double g = sys.g_at(x, y, lam);
    const double g_x = sys.gx(x, y, lam);
    const double g_y = sys.gy(x, y, lam);
    const double g_l = sys.glam(x, y, lam);

    // y is eliminated on S: dy/dx = -f_x/f_y and dy/dlambda = -f_lambda/f_y
    const double y_x = -f_x / f_y;
    const double y_l = -f_l / f_y;

    std::array<std::array<double, 2>, 2> J{};
    J[0][0] = (g_x + g_y * y_x) * f_y + g * (f_xy + f_yy * y_x) +
              eps * lp * (f_xl + f_yl * y_x);
    J[0][1] = lp * ((g_l + g_y * y_l) * f_y + g * (f_yl + f_yy * y_l) +
                    eps * lp * (f_ll + f_yl * y_l)) +
              eps * f_l * lpp;
    J[1][0] = -eps * (f_xx + f_xy * y_x);
    J[1][1] = -eps * lp * (f_xl + f_xy * y_l);
    return J;
}

FoldedSingularity classify_folded_singularity(const SystemDefinition& sys,
                                              const ForcingProfile& forcing,
                                              double tau_star,
                                              std::pair<double, double> x_range) {
    const double lam = forcing.lambda(tau_star);
    const FoldPoint fp = fold_point(sys, lam, x_range);
    FoldedSingularity s;
    s.x_star = fp.x_F;
    s.y_star = fp.y_F;
    s.tau_star = tau_star;
    s.lambda_star = lam;

    const double res = numerator(sys, forcing, fp.x_F, tau_star);
    if (std::abs(res) > kResidualTol)
        throw SingularityError("candidate does not satisfy the folded-singularity "
                               "condition: |residual| = " +
                               std::to_string(std::abs(res)));

    const auto J = desing_jacobian(sys, forcing, fp.x_F, tau_star);
    const double tr = J[0][0] + J[1][1];
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    const double disc = tr * tr - 4.0 * det;
    s.c_coeff = tr;

    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        s.xi1 = {(tr + sq) / 2.0, 0.0};
        s.xi2 = {(tr - sq) / 2.0, 0.0};
    } else {
        const double sq = std::sqrt(-disc);
        s.xi1 = {tr / 2.0, sq / 2.0};
        s.xi2 = {tr / 2.0, -sq / 2.0};
    }

    const double im = std::abs(s.xi1.imag());
    const double re1 = s.xi1.real();
    const double re2 = s.xi2.real();
    if (im > kEigZeroTol) {
        if (std::abs(re1) <= kEigZeroTol)
            s.kind = SingularityKind::FoldedCentre;
        else
            s.kind = re1 < 0.0 ? SingularityKind::FoldedFocusStable
                               : SingularityKind::FoldedFocusUnstable;
    } else {
        // treat as real
        s.xi1 = {re1, 0.0};
        s.xi2 = {re2, 0.0};
        if (std::abs(re1) <= kEigZeroTol || std::abs(re2) <= kEigZeroTol) {
            s.kind = SingularityKind::FoldedSaddleNodeI;
        } else if (re1 * re2 < 0.0) {
            s.kind = SingularityKind::FoldedSaddle;
        } else {
            s.kind = re1 < 0.0 ? SingularityKind::FoldedNodeStable
                               : SingularityKind::FoldedNodeUnstable;
        }
        auto eigvec = [&](double xi) -> std::array<double, 2> {
            // (J - xi I) v = 0; take the better-conditioned row
            const std::array<double, 2> v1{J[0][1], xi - J[0][0]};
            const std::array<double, 2> v2{xi - J[1][1], J[1][0]};
            const double n1 = std::hypot(v1[0], v1[1]);
            const double n2 = std::hypot(v2[0], v2[1]);
            std::array<double, 2> v = n1 >= n2 ? v1 : v2;
            const double n = std::max(n1, n2);
            if (n == 0.0) return {1.0, 0.0};
            return {v[0] / n, v[1] / n};
        };
        s.eigvec1 = eigvec(re1);
        s.eigvec2 = eigvec(re2);
    }

    if (s.kind == SingularityKind::FoldedSaddleNodeI)
        s.b_sign = 0;
    else
        s.b_sign = det < 0.0 ? -1 : 1;
    return s;
}

std::vector<FoldedSingularity> find_folded_singularities(const SystemDefinition& sys,
                                                         const ForcingProfile& forcing,
                                                         std::pair<double, double> x_range) {
    const auto [tau_lo, tau_hi] = forcing.scan_window();
    // fold continuation, warm-started across the scan
    FoldPoint warm = fold_point(sys, forcing.lambda(0.5 * (tau_lo + tau_hi)), x_range);
    auto psi_fn = [&](double tau) {
        warm = refine_fold(sys, forcing.lambda(tau), warm.x_F, warm.y_F);
        return numerator(sys, forcing, warm.x_F, tau);
    };
    const auto roots = find_roots_scanned(psi_fn, tau_lo, tau_hi, 2001, 1e-12, 1e-9);
    std::vector<FoldedSingularity> out;
    out.reserve(roots.size());
    for (const auto& r : roots)
        out.push_back(classify_folded_singularity(sys, forcing, r.x, x_range));
    return out;
}

CriticalRateReport estimate_critical_rate(const SystemDefinition& sys,
                                          const ForcingProfile& forcing_family,
                                          std::pair<double, double> eps_bracket,
                                          std::pair<double, double> x_range) {
    auto has_singularity = [&](double eps) {
        return !find_folded_singularities(sys, forcing_family.with_epsilon(eps), x_range)
                    .empty();
    };
    double lo = eps_bracket.first;
    double hi = eps_bracket.second;
    const bool lo_has = has_singularity(lo);
    const bool hi_has = has_singularity(hi);
    if (lo_has && hi_has)
        throw BracketError("estimate_critical_rate: singularities present at both ends");
    if (!lo_has && !hi_has)
        throw BracketError("estimate_critical_rate: no singularities at either end");
    if (lo_has) std::swap(lo, hi);  // keep lo = empty side
    while (std::abs(hi - lo) > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (has_singularity(mid))
            hi = mid;
        else
            lo = mid;
    }
    CriticalRateReport report;
    report.epsilon_c_singular = 0.5 * (lo + hi);
    return report;
}

}  // namespace fastslow
