#include "fastslow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "fastslow/integrate.hpp"
#include "fastslow/rootfind.hpp"

namespace fastslow {

namespace {

constexpr int kTableSize = 1025;

// Clamped forcing evaluation: integrator trial stages may probe slightly
// outside the tau domain; the clamp keeps those probes finite while events
// stop the solution itself at the boundary.
double lam_clamped(const ForcingProfile& fp, double tau) {
    return fp.lambda(std::clamp(tau, fp.tau_min(), fp.tau_max()));
}
double dlam_clamped(const ForcingProfile& fp, double tau) {
    return fp.dlambda(std::clamp(tau, fp.tau_min(), fp.tau_max()));
}

StepControl make_control(const IntegratorSettings& s) {
    StepControl c;
    c.rel_tol = s.rel_tol;
    c.abs_tol = s.abs_tol;
    c.max_step = s.max_step;
    c.event_tol = 1e-10;
    c.max_steps = s.max_steps;
    return c;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Tracked: return "tracked";
        case Verdict::Destabilized: return "destabilized";
        case Verdict::Exhausted: return "exhausted";
        case Verdict::HitFold: return "hit-fold";
    }
    return "?";
}

FlowContext::FlowContext(const SystemDefinition& sys, const ForcingProfile& forcing,
                         std::pair<double, double> x_range)
    : sys_(sys), forcing_(forcing), x_range_(x_range) {
    singularities_ = find_folded_singularities(sys_, forcing_, x_range_);

    // default horizon: forcing effectively frozen, |dlambda/dtau| <= 1e-6
    if (forcing_.kind() == ForcingKind::Constant) {
        horizon_ = std::isfinite(forcing_.tau_max()) ? forcing_.tau_max() : 0.0;
    } else {
        const auto win = forcing_.scan_window(1e-7);
        double t_last = win.first;
        bool moving = false;
        const int n = 1001;
        for (int i = 0; i < n; ++i) {
            const double tau = win.first + (win.second - win.first) * i / (n - 1);
            if (std::abs(forcing_.dlambda(tau)) > 1e-6) {
                t_last = tau;
                moving = true;
            }
        }
        if (!moving) {
            horizon_ = win.first;
        } else if (std::abs(forcing_.dlambda(win.second)) > 1e-6) {
            horizon_ = win.second;
        } else {
            horizon_ = bisect(
                [&](double tau) { return std::abs(forcing_.dlambda(tau)) - 1e-6; }, t_last,
                win.second, 1e-9);
        }
    }
    quiet_time_ = singularities_.empty() ? horizon_ : singularities_.back().tau_star;

    // lambda tables for the fold curve and the moving stable state, built by
    // continuation; construction doubles as the (A1)/(A2) gate across the
    // attained lambda range.
    lam_lo_ = forcing_.lambda_min();
    lam_hi_ = forcing_.lambda_max();
    if (forcing_.kind() == ForcingKind::Constant) {
        fold_table_ = {fold_point(sys_, lam_lo_, x_range_)};
        equil_table_ = {stable_equilibrium(sys_, lam_lo_, x_range_)};
        return;
    }
    fold_table_.reserve(kTableSize);
    equil_table_.reserve(kTableSize);
    FoldPoint fp = fold_point(sys_, lam_lo_, x_range_);
    auto eq = stable_equilibrium(sys_, lam_lo_, x_range_);
    fold_table_.push_back(fp);
    equil_table_.push_back(eq);
    const double delta_eff = sys_.delta() > 0.0 ? sys_.delta() : 1e-3;
    for (int i = 1; i < kTableSize; ++i) {
        const double lam = lam_lo_ + (lam_hi_ - lam_lo_) * i / (kTableSize - 1);
        fp = refine_fold(sys_, lam, fp.x_F, fp.y_F);
        // equilibrium continuation: 2x2 Newton on (f, g)
        double x = eq.first, y = eq.second;
        for (int it = 0; it < 40; ++it) {
            const double r0 = sys_.f_at(x, y, lam);
            const double r1 = sys_.g_at(x, y, lam);
            if (std::abs(r0) <= 1e-13 && std::abs(r1) <= 1e-13) break;
            const double j00 = sys_.fx(x, y, lam), j01 = sys_.fy(x, y, lam);
            const double j10 = sys_.gx(x, y, lam), j11 = sys_.gy(x, y, lam);
            const double det = j00 * j11 - j01 * j10;
            if (det == 0.0) throw AssumptionError("equilibrium continuation stalled (A2)");
            x -= (r0 * j11 - r1 * j01) / det;
            y -= (j00 * r1 - j10 * r0) / det;
        }
        const double tr = sys_.fx(x, y, lam) / delta_eff + sys_.gy(x, y, lam);
        const double dt2 = (sys_.fx(x, y, lam) * sys_.gy(x, y, lam) -
                            sys_.fy(x, y, lam) * sys_.gx(x, y, lam)) /
                           delta_eff;
        if (!(tr < 0.0 && dt2 > 0.0))
            throw AssumptionError("moving state x~ lost stability at lambda = " +
                                  std::to_string(lam) + " (A2)");
        eq = {x, y};
        fold_table_.push_back(fp);
        equil_table_.push_back(eq);
    }
}

FoldPoint FlowContext::fold_at(double lam) const {
    if (fold_table_.size() == 1)
        return refine_fold(sys_, lam, fold_table_[0].x_F, fold_table_[0].y_F);
    const double u = std::clamp((lam - lam_lo_) / (lam_hi_ - lam_lo_), 0.0, 1.0);
    const auto idx = std::min<size_t>(static_cast<size_t>(u * (kTableSize - 1)),
                                      fold_table_.size() - 1);
    return refine_fold(sys_, lam, fold_table_[idx].x_F, fold_table_[idx].y_F);
}

std::pair<double, double> FlowContext::equilibrium_at(double lam) const {
    const double u = fold_table_.size() == 1
                         ? 0.0
                         : std::clamp((lam - lam_lo_) / (lam_hi_ - lam_lo_), 0.0, 1.0);
    const auto idx = std::min<size_t>(static_cast<size_t>(u * (kTableSize - 1)),
                                      equil_table_.size() - 1);
    double x = equil_table_[idx].first, y = equil_table_[idx].second;
    for (int it = 0; it < 40; ++it) {
        const double r0 = sys_.f_at(x, y, lam);
        const double r1 = sys_.g_at(x, y, lam);
        if (std::abs(r0) <= 1e-13 && std::abs(r1) <= 1e-13) break;
        const double j00 = sys_.fx(x, y, lam), j01 = sys_.fy(x, y, lam);
        const double j10 = sys_.gx(x, y, lam), j11 = sys_.gy(x, y, lam);
        const double det = j00 * j11 - j01 * j10;
        if (det == 0.0) break;
        x -= (r0 * j11 - r1 * j01) / det;
        y -= (j00 * r1 - j10 * r0) / det;
    }
    return {x, y};
}

double distance_to_manifold(const SystemDefinition& sys, double x, double y, double lam) {
    return std::abs(x - manifold_x_near(sys, y, lam, x));
}

Trajectory integrate_full(const FlowContext& ctx, double x0, double y0, double tau0,
                          const IntegratorSettings& settings) {
    const auto& sys = ctx.sys();
    const auto& fp = ctx.forcing();
    if (!(sys.delta() > 0.0))
        throw DomainError("integrate_full requires delta > 0");
    if (!(tau0 >= fp.tau_min() && tau0 <= fp.tau_max()))
        throw DomainError("tau0 outside the forcing domain");
    const double eps = fp.epsilon();
    const double delta = sys.delta();

    const double horizon = std::max(settings.horizon.value_or(ctx.default_horizon()), tau0);
    double tau_stop = horizon + settings.horizon_slack;
    if (std::isfinite(fp.tau_max())) tau_stop = std::min(tau_stop, fp.tau_max());
    const double quiet = std::max(ctx.quiet_time(), tau0);

    auto rhs = [&](double tau, const Vec<2>& s, Vec<2>& d) {
        const double lam = lam_clamped(fp, tau);
        d[0] = sys.f_at(s[0], s[1], lam) / (delta * eps);
        d[1] = sys.g_at(s[0], s[1], lam) / eps;
    };
    auto jac = [&](double tau, const Vec<2>& s, Mat<2>& J, Vec<2>& dfdt) {
        const double lam = lam_clamped(fp, tau);
        const double lp = dlam_clamped(fp, tau);
        J[0][0] = sys.fx(s[0], s[1], lam) / (delta * eps);
        J[0][1] = sys.fy(s[0], s[1], lam) / (delta * eps);
        J[1][0] = sys.gx(s[0], s[1], lam) / eps;
        J[1][1] = sys.gy(s[0], s[1], lam) / eps;
        dfdt[0] = sys.flam(s[0], s[1], lam) * lp / (delta * eps);
        dfdt[1] = sys.glam(s[0], s[1], lam) * lp / eps;
    };

    std::vector<EventSpec<2>> events(2);
    // E1: escape beyond the fold along the fast direction
    events[0].fn = [&](double tau, const Vec<2>& s) {
        const double lam = lam_clamped(fp, tau);
        return s[0] - (ctx.fold_at(lam).x_F + settings.escape_offset);
    };
    events[0].direction = +1;
    // E2: inside the tracking tube around x~ after the quiet time
    events[1].fn = [&](double tau, const Vec<2>& s) {
        if (tau < quiet) return -1.0;
        const double lam = lam_clamped(fp, tau);
        if (sys.fx(s[0], s[1], lam) >= 0.0) return -1.0;
        const double xt = ctx.equilibrium_at(lam).first;
        return std::abs(s[0] - xt) <= settings.tracking_tube ? 1.0 : -1.0;
    };
    events[1].direction = +1;

    Trajectory traj;
    double prev_tau = tau0;
    auto observer = [&](double tau, const Vec<2>& s) {
        const double lam = lam_clamped(fp, tau);
        if (settings.record_samples) traj.samples.push_back({tau, s[0], s[1], lam});
        if (settings.track_dwell) {
            const double xf = ctx.fold_at(lam).x_F;
            if (s[0] > xf) {
                try {
                    const double xr = manifold_x_near(sys, s[1], lam, s[0]);
                    if (xr > xf &&
                        std::abs(s[0] - xr) <= settings.dwell_tube)
                        traj.dwell_s_r += tau - prev_tau;
                } catch (const AssumptionError&) {
                    // no nearby S^r sheet; nothing to accumulate
                }
            }
        }
        prev_tau = tau;
    };

    const StepControl ctrl = make_control(settings);
    const auto kind =
        settings.stiff ? StepperKind::Rosenbrock4 : StepperKind::DormandPrince45;
    auto res = integrate_with_jacobian<2>(kind, rhs, jac, tau0, tau_stop, {x0, y0}, ctrl,
                                          events, observer, false);

    const double lam_end = lam_clamped(fp, res.t_end);
    traj.verdict_time = res.t_end;
    traj.final_distance = std::abs(res.y_end[0] - ctx.equilibrium_at(lam_end).first);
    if (res.event_index == 0) {
        traj.verdict = Verdict::Destabilized;
    } else if (res.event_index == 1) {
        traj.verdict = Verdict::Tracked;
    } else {
        const bool in_tube = traj.final_distance <= settings.tracking_tube &&
                             sys.fx(res.y_end[0], res.y_end[1], lam_end) < 0.0;
        traj.verdict = in_tube ? Verdict::Tracked : Verdict::Exhausted;
    }
    return traj;
}

Trajectory integrate_full(const SystemDefinition& sys, const ForcingProfile& forcing,
                          double x0, double y0, double tau0,
                          const IntegratorSettings& settings) {
    FlowContext ctx(sys, forcing);
    return integrate_full(ctx, x0, y0, tau0, settings);
}

Trajectory integrate_reduced(const FlowContext& ctx, double x0, double tau0,
                             const IntegratorSettings& settings) {
    const auto& sys = ctx.sys();
    const auto& fp = ctx.forcing();
    const double eps = fp.epsilon();

    const double horizon = std::max(settings.horizon.value_or(ctx.default_horizon()), tau0);
    double tau_stop = horizon + settings.horizon_slack;
    if (std::isfinite(fp.tau_max())) tau_stop = std::min(tau_stop, fp.tau_max());
    const double quiet = std::max(ctx.quiet_time(), tau0);
    constexpr double kDivergenceCap = 1e5;

    auto slope = [&](double tau, double x) {
        const double lam = lam_clamped(fp, tau);
        const double y = manifold_y(sys, x, lam);
        const double fx = sys.fx(x, y, lam);
        const double num =
            sys.g_at(x, y, lam) * sys.fy(x, y, lam) +
            eps * sys.flam(x, y, lam) * dlam_clamped(fp, tau);
        return -num / (eps * fx);
    };
    auto rhs = [&](double tau, const Vec<1>& s, Vec<1>& d) { d[0] = slope(tau, s[0]); };

    std::vector<EventSpec<1>> events(2);
    events[0].fn = [&](double tau, const Vec<1>& s) {
        return std::abs(slope(tau, s[0])) - kDivergenceCap;
    };
    events[0].direction = +1;
    events[1].fn = [&](double tau, const Vec<1>& s) {
        if (tau < quiet) return -1.0;
        const double lam = lam_clamped(fp, tau);
        const double y = manifold_y(sys, s[0], lam);
        if (sys.fx(s[0], y, lam) >= 0.0) return -1.0;
        const double xt = ctx.equilibrium_at(lam).first;
        return std::abs(s[0] - xt) <= settings.tracking_tube ? 1.0 : -1.0;
    };
    events[1].direction = +1;

    Trajectory traj;
    double last_tau = tau0, last_x = x0;
    auto observer = [&](double tau, const Vec<1>& s) {
        last_tau = tau;
        last_x = s[0];
        if (!settings.record_samples) return;
        const double lam = lam_clamped(fp, tau);
        traj.samples.push_back({tau, s[0], manifold_y(sys, s[0], lam), lam});
    };

    IntegrationResult<1> res;
    try {
        res = integrate<1>(rhs, tau0, tau_stop, {x0}, make_control(settings), events,
                           observer, false);
    } catch (const StiffnessError&) {
        // the step size underflows when dx/dtau blows up faster than the
        // divergence event can be localized: that is the fold
        if (std::abs(slope(last_tau, last_x)) < 1e3) throw;
        traj.verdict = Verdict::HitFold;
        traj.verdict_time = last_tau;
        traj.final_distance = std::abs(last_x - ctx.equilibrium_at(lam_clamped(fp, last_tau)).first);
        return traj;
    }
    const double lam_end = lam_clamped(fp, res.t_end);
    traj.verdict_time = res.t_end;
    traj.final_distance = std::abs(res.y_end[0] - ctx.equilibrium_at(lam_end).first);
    if (res.event_index == 0) {
        traj.verdict = Verdict::HitFold;
    } else if (res.event_index == 1) {
        traj.verdict = Verdict::Tracked;
    } else {
        const double y_end = manifold_y(sys, res.y_end[0], lam_end);
        const bool in_tube = traj.final_distance <= settings.tracking_tube &&
                             sys.fx(res.y_end[0], y_end, lam_end) < 0.0;
        traj.verdict = in_tube ? Verdict::Tracked : Verdict::Exhausted;
    }
    return traj;
}

Trajectory integrate_reduced(const SystemDefinition& sys, const ForcingProfile& forcing,
                             double x0, double tau0, const IntegratorSettings& settings) {
    FlowContext ctx(sys, forcing);
    return integrate_reduced(ctx, x0, tau0, settings);
}

Trajectory integrate_desing(const SystemDefinition& sys, const ForcingProfile& forcing,
                            double x0, double tau0, double s_span,
                            const IntegratorSettings& settings) {
    auto rhs = [&](double /*s*/, const Vec<2>& st, Vec<2>& d) {
        const double lam = lam_clamped(forcing, st[1]);
        const double y = manifold_y(sys, st[0], lam);
        d[0] = sys.g_at(st[0], y, lam) * sys.fy(st[0], y, lam) +
               forcing.epsilon() * sys.flam(st[0], y, lam) * dlam_clamped(forcing, st[1]);
        d[1] = -forcing.epsilon() * sys.fx(st[0], y, lam);
    };

    const auto win = forcing.kind() == ForcingKind::Constant
                         ? std::pair<double, double>{-1e30, 1e30}
                         : forcing.scan_window(1e-12);
    std::vector<EventSpec<2>> events(3);
    events[0].fn = [&](double, const Vec<2>& st) { return st[1] - win.first; };
    events[0].direction = -1;
    events[1].fn = [&](double, const Vec<2>& st) { return st[1] - win.second; };
    events[1].direction = +1;
    events[2].fn = [&](double, const Vec<2>& st) { return std::abs(st[0]) - 50.0; };
    events[2].direction = +1;

    Trajectory traj;
    auto observer = [&](double /*s*/, const Vec<2>& st) {
        if (!settings.record_samples) return;
        const double lam = lam_clamped(forcing, st[1]);
        traj.samples.push_back({st[1], st[0], manifold_y(sys, st[0], lam), lam});
    };
    auto res = integrate<2>(rhs, 0.0, s_span, {x0, tau0}, make_control(settings), events,
                            observer, false);
    traj.verdict = Verdict::Exhausted;
    traj.verdict_time = res.t_end;
    traj.final_distance = 0.0;
    return traj;
}

}  // namespace fastslow
