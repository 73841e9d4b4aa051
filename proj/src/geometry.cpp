#include "fastslow/geometry.hpp"

#include <cmath>

#include "fastslow/rootfind.hpp"

namespace fastslow {

namespace {

constexpr GeometryTolerances kTol{};
constexpr double kFoldGap = 1e-9;  // no stability label this close to a fold (in x)

double polyval(const std::vector<double>& c, double v) {
    double acc = 0.0;
    for (size_t m = c.size(); m-- > 0;) acc = acc * v + c[m];
    return acc;
}

double polyval_deriv(const std::vector<double>& c, double v) {
    double acc = 0.0;
    for (size_t m = c.size(); m-- > 1;) acc = acc * v + c[m] * static_cast<double>(m);
    return acc;
}

// One Newton refinement pass of a 2x2 system; returns false on a singular step.
bool newton2(double& u, double& v, double r0, double r1, double j00, double j01,
             double j10, double j11) {
    const double det = j00 * j11 - j01 * j10;
    if (det == 0.0 || !std::isfinite(det)) return false;
    u -= (r0 * j11 - r1 * j01) / det;
    v -= (j00 * r1 - j10 * r0) / det;
    return true;
}

}  // namespace

double manifold_y(const SystemDefinition& sys, double x, double lam,
                  std::optional<double> hint) {
    const auto c = sys.f().y_coefficients(x, lam);
    if (c.size() == 2) {
        if (c[1] == 0.0) throw AssumptionError("f degenerate in y at this point");
        return -c[0] / c[1];
    }
    double y = hint.value_or(0.0);
    for (int it = 0; it < 100; ++it) {
        const double r = polyval(c, y);
        if (std::abs(r) <= kTol.root_residual) return y;
        const double d = polyval_deriv(c, y);
        if (d == 0.0) break;
        y -= r / d;
    }
    if (std::abs(polyval(c, y)) <= 1e-9) return y;  // accept near-converged
    throw AssumptionError("manifold_y: could not solve f(x, y, lambda) = 0 for y");
}

double manifold_x_near(const SystemDefinition& sys, double y, double lam, double hint) {
    const auto c = sys.f().x_coefficients(y, lam);
    double x = hint;
    for (int it = 0; it < 100; ++it) {
        const double r = polyval(c, x);
        if (std::abs(r) <= kTol.root_residual) return x;
        const double d = polyval_deriv(c, x);
        if (d == 0.0) break;
        const double step = -r / d;
        x += step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) return x;
    }
    if (std::abs(polyval(c, x)) <= 1e-9) return x;
    throw AssumptionError("manifold_x_near: no root of f in x near hint");
}

ManifoldSide classify_side(const SystemDefinition& sys, double x, double lam) {
    const double y = manifold_y(sys, x, lam);
    const double s = sys.fx(x, y, lam);
    if (std::abs(s) <= kFoldGap) return ManifoldSide::OnFold;
    return s < 0.0 ? ManifoldSide::Attracting : ManifoldSide::Repelling;
}

FoldPoint refine_fold(const SystemDefinition& sys, double lam, double x_guess,
                      double y_guess) {
    double x = x_guess;
    double y = y_guess;
    for (int it = 0; it < 60; ++it) {
        const double r0 = sys.f_at(x, y, lam);
        const double r1 = sys.fx(x, y, lam);
        if (std::abs(r0) <= kTol.root_residual && std::abs(r1) <= kTol.root_residual) break;
        if (!newton2(x, y, r0, r1, sys.fx(x, y, lam), sys.fy(x, y, lam),
                     sys.fxx(x, y, lam), sys.fxy(x, y, lam)))
            throw AssumptionError("refine_fold: singular Newton step (degenerate fold?)");
    }
    FoldPoint fp;
    fp.x_F = x;
    fp.y_F = y;
    fp.lambda = lam;
    fp.second_deriv = sys.fxx(x, y, lam);
    if (std::abs(sys.f_at(x, y, lam)) > 1e-10 || std::abs(sys.fx(x, y, lam)) > 1e-10)
        throw AssumptionError("refine_fold: fold refinement did not converge");
    if (std::abs(fp.second_deriv) < kTol.degeneracy)
        throw AssumptionError("fold is not quadratic: |d2f/dx2| below degeneracy guard (A1)");
    return fp;
}

FoldPoint fold_point(const SystemDefinition& sys, double lam,
                     std::pair<double, double> x_range, std::optional<double> x_guess) {
    if (x_guess) {
        const double y = manifold_y(sys, *x_guess, lam);
        return refine_fold(sys, lam, *x_guess, y);
    }
    auto dfdx_on_s = [&](double x) {
        const double y = manifold_y(sys, x, lam);
        return sys.fx(x, y, lam);
    };
    const auto roots =
        find_roots_scanned(dfdx_on_s, x_range.first, x_range.second, 801, 1e-13, 1e-10);
    if (roots.empty())
        throw AssumptionError("no fold in x-range at lambda = " + std::to_string(lam) +
                              " (A1)");
    if (roots.size() > 1)
        throw AssumptionError("multiple folds in x-range (single-fold assumption, A1)");
    const double x = roots.front().x;
    return refine_fold(sys, lam, x, manifold_y(sys, x, lam));
}

std::vector<FoldPoint> fold_curve(const SystemDefinition& sys, double lambda_lo,
                                  double lambda_hi, int n_samples,
                                  std::pair<double, double> x_range) {
    if (n_samples < 2) n_samples = 2;
    std::vector<FoldPoint> curve;
    curve.reserve(static_cast<size_t>(n_samples));
    FoldPoint prev = fold_point(sys, lambda_lo, x_range);
    curve.push_back(prev);
    for (int i = 1; i < n_samples; ++i) {
        const double lam = lambda_lo + (lambda_hi - lambda_lo) * i / (n_samples - 1);
        // predictor: previous fold location; corrector: Newton
        prev = refine_fold(sys, lam, prev.x_F, prev.y_F);
        curve.push_back(prev);
    }
    return curve;
}

std::pair<double, double> stable_equilibrium(const SystemDefinition& sys, double lam,
                                             std::pair<double, double> x_range) {
    const FoldPoint fp = fold_point(sys, lam, x_range);
    // attracting side of the fold
    const double probe = 1e-3 * (x_range.second - x_range.first);
    double a = x_range.first;
    double b = fp.x_F - probe;
    {
        const double y = manifold_y(sys, 0.5 * (a + b), lam);
        if (sys.fx(0.5 * (a + b), y, lam) > 0.0) {
            a = fp.x_F + probe;
            b = x_range.second;
        }
    }
    auto g_on_s = [&](double x) { return sys.g_at(x, manifold_y(sys, x, lam), lam); };
    const auto roots = find_roots_scanned(g_on_s, a, b, 801, 1e-13, 1e-10);

    const double delta_eff = sys.delta() > 0.0 ? sys.delta() : 1e-3;
    std::vector<std::pair<double, double>> stable;
    for (const auto& r : roots) {
        double x = r.x;
        double y = manifold_y(sys, x, lam);
        for (int it = 0; it < 60; ++it) {
            const double r0 = sys.f_at(x, y, lam);
            const double r1 = sys.g_at(x, y, lam);
            if (std::abs(r0) <= kTol.root_residual && std::abs(r1) <= kTol.root_residual)
                break;
            if (!newton2(x, y, r0, r1, sys.fx(x, y, lam), sys.fy(x, y, lam),
                         sys.gx(x, y, lam), sys.gy(x, y, lam)))
                break;
        }
        const double tr = sys.fx(x, y, lam) / delta_eff + sys.gy(x, y, lam);
        const double det = (sys.fx(x, y, lam) * sys.gy(x, y, lam) -
                            sys.fy(x, y, lam) * sys.gx(x, y, lam)) /
                           delta_eff;
        if (tr < 0.0 && det > 0.0) stable.emplace_back(x, y);
    }
    if (stable.empty())
        throw AssumptionError("no stable steady state on S^a near the fold (A2)");
    if (stable.size() > 1)
        throw AssumptionError("multiple stable steady states on S^a near the fold (A2)");
    return stable.front();
}

CriticalManifoldSlice slice_manifold(const SystemDefinition& sys, double lam,
                                     std::pair<double, double> x_range, int n_samples) {
    if (n_samples < 8) n_samples = 8;
    CriticalManifoldSlice slice;
    slice.lambda = lam;
    const FoldPoint fp = fold_point(sys, lam, x_range);
    slice.folds.push_back(fp);

    auto make_branch = [&](double lo, double hi, int n) {
        ManifoldBranch br;
        br.x_lo = lo;
        br.x_hi = hi;
        br.samples.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double x = lo + (hi - lo) * i / (n - 1);
            br.samples.emplace_back(x, manifold_y(sys, x, lam));
        }
        const double xm = 0.5 * (lo + hi);
        const double ym = manifold_y(sys, xm, lam);
        br.stability =
            sys.fx(xm, ym, lam) < 0.0 ? Stability::Attracting : Stability::Repelling;
        return br;
    };
    const double span = x_range.second - x_range.first;
    const int n_left =
        std::max(4, static_cast<int>(n_samples * (fp.x_F - x_range.first) / span));
    const int n_right = std::max(4, n_samples - n_left);
    if (fp.x_F - kFoldGap > x_range.first)
        slice.branches.push_back(make_branch(x_range.first, fp.x_F - kFoldGap, n_left));
    if (fp.x_F + kFoldGap < x_range.second)
        slice.branches.push_back(make_branch(fp.x_F + kFoldGap, x_range.second, n_right));

    slice.equilibrium = stable_equilibrium(sys, lam, x_range);
    return slice;
}

std::pair<double, double> project_onto_s_attracting(const SystemDefinition& sys, double x,
                                                    double lam,
                                                    const ProjectionOptions& opts) {
    const ManifoldSide side = classify_side(sys, x, lam);
    if (side == ManifoldSide::Repelling && !opts.allow_repelling)
        throw SideError("x = " + std::to_string(x) +
                        " projects onto the repelling branch S^r (pass the S^r flag to "
                        "allow this)");
    if (side == ManifoldSide::OnFold && !opts.allow_on_fold && !opts.allow_repelling)
        throw SideError("x lies on the fold (pass the on-fold flag to allow this)");
    return {x, manifold_y(sys, x, lam)};
}

}  // namespace fastslow
