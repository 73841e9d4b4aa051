#include "fastslow/canard.hpp"

#include <algorithm>
#include <cmath>

#include "fastslow/rootfind.hpp"

namespace fastslow {

namespace {

constexpr double kMinShadowRun = 0.1;  // minimum tau length of a shadowed segment

// Linear interpolant of x over an ordered (tau, x) polyline.
struct PathInterp {
    std::vector<std::pair<double, double>> pts;  // (tau, x), strictly increasing tau

    static PathInterp from_samples(const std::vector<TrajectorySample>& samples) {
        PathInterp p;
        p.pts.reserve(samples.size());
        for (const auto& s : samples) {
            if (!p.pts.empty() && s.t <= p.pts.back().first) continue;
            p.pts.push_back({s.t, s.x});
        }
        return p;
    }
    bool covers(double tau) const {
        return !pts.empty() && tau >= pts.front().first && tau <= pts.back().first;
    }
    double x_at(double tau) const {
        auto it = std::lower_bound(pts.begin(), pts.end(), tau,
                                   [](const auto& a, double b) { return a.first < b; });
        if (it == pts.begin()) return it->second;
        if (it == pts.end()) return pts.back().second;
        const auto& [t1, x1] = *it;
        const auto& [t0, x0] = *(it - 1);
        const double w = (tau - t0) / (t1 - t0);
        return x0 + w * (x1 - x0);
    }
};

}  // namespace

std::string to_string(CanardBranch b) {
    switch (b) {
        case CanardBranch::SaddleStable: return "saddle-stable";
        case CanardBranch::SaddleUnstable: return "saddle-faux";
        case CanardBranch::NodeStrong: return "node-strong";
        case CanardBranch::NodeWeak: return "node-weak";
    }
    return "?";
}

std::string to_string(MaximalKind k) {
    switch (k) {
        case MaximalKind::FoldedSaddle: return "folded-saddle";
        case MaximalKind::StrongNode: return "strong-node";
        case MaximalKind::WeakNode: return "weak-node";
        case MaximalKind::SecondaryNode: return "secondary-node";
        case MaximalKind::Composite: return "composite";
    }
    return "?";
}

double SingularCanard::x_at_tau(double tau) const {
    return PathInterp::from_samples(path).x_at(tau);
}

std::vector<SingularCanard> singular_canards(const SystemDefinition& sys,
                                             const ForcingProfile& forcing,
                                             const FoldedSingularity& singularity,
                                             const CanardSettings& settings) {
    std::vector<SingularCanard> out;
    if (singularity.kind == SingularityKind::FoldedFocusStable ||
        singularity.kind == SingularityKind::FoldedFocusUnstable ||
        singularity.kind == SingularityKind::FoldedCentre)
        return out;  // complex eigenvalues: no eigendirections, canards disappear

    struct Direction {
        double xi;
        std::array<double, 2> v;
        CanardBranch branch;
    };
    std::vector<Direction> dirs;
    const double xi1 = singularity.xi1.real();
    const double xi2 = singularity.xi2.real();
    const bool is_node = xi1 * xi2 > 0.0;
    if (is_node && singularity.eigvec1 && singularity.eigvec2) {
        const auto& v1 = *singularity.eigvec1;
        const auto& v2 = *singularity.eigvec2;
        const double cross = std::abs(v1[0] * v2[1] - v1[1] * v2[0]);
        if (cross < 1e-6)
            throw DegeneracyError("folded node has numerically coincident eigenvectors");
    }
    auto add = [&](double xi, const std::optional<std::array<double, 2>>& v) {
        if (!v || std::abs(xi) <= 1e-8) return;  // zero eigendirection is degenerate
        CanardBranch branch;
        if (is_node)
            branch = std::abs(xi) == std::max(std::abs(xi1), std::abs(xi2))
                         ? CanardBranch::NodeStrong
                         : CanardBranch::NodeWeak;
        else
            branch = xi < 0.0 ? CanardBranch::SaddleStable : CanardBranch::SaddleUnstable;
        dirs.push_back({xi, *v, branch});
    };
    add(xi1, singularity.eigvec1);
    add(xi2, singularity.eigvec2);

    IntegratorSettings is = settings.integrator;
    is.record_samples = true;
    for (const auto& d : dirs) {
        SingularCanard c;
        c.singularity = singularity;
        c.branch = d.branch;
        // integrate away from the singularity along both ends of the
        // eigendirection: backward in rescaled time for a stable direction,
        // forward for an unstable one
        const double s_dir = d.xi > 0.0 ? 1.0 : -1.0;
        for (const double sgn : {-1.0, 1.0}) {
            const double x0 = singularity.x_star + sgn * settings.eta_seed * d.v[0];
            const double tau0 = singularity.tau_star + sgn * settings.eta_seed * d.v[1];
            const Trajectory branch_traj =
                integrate_desing(sys, forcing, x0, tau0, s_dir * settings.s_span, is);
            c.path.insert(c.path.end(), branch_traj.samples.begin(),
                          branch_traj.samples.end());
        }
        c.path.push_back({singularity.tau_star, singularity.x_star, singularity.y_star,
                          singularity.lambda_star});
        std::sort(c.path.begin(), c.path.end(),
                  [](const auto& a, const auto& b) { return a.t < b.t; });
        out.push_back(std::move(c));
    }
    // strong canard first for nodes, stable branch first for saddles
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return static_cast<int>(a.branch) < static_cast<int>(b.branch);
    });
    return out;
}

namespace {

// Jump side of one seed on the section: +1 when the trajectory escapes past
// the fold (destabilizes), -1 when it returns and tracks.
int jump_side(const FlowContext& ctx, double x0, double lambda_sec, double tau_sec,
              const IntegratorSettings& settings) {
    IntegratorSettings s = settings;
    s.record_samples = false;
    s.track_dwell = false;
    const double y0 = manifold_y(ctx.sys(), x0, lambda_sec);
    const Trajectory t = integrate_full(ctx, x0, y0, tau_sec, s);
    return t.verdict == Verdict::Destabilized ? +1 : -1;
}

Trajectory seed_trajectory(const FlowContext& ctx, double x0, double lambda_sec,
                           double tau_sec, const IntegratorSettings& settings) {
    IntegratorSettings s = settings;
    s.record_samples = true;
    s.track_dwell = true;
    return integrate_full(ctx, x0, manifold_y(ctx.sys(), x0, lambda_sec), tau_sec, s);
}

MaximalKind kind_from_branch(CanardBranch b) {
    switch (b) {
        case CanardBranch::NodeStrong: return MaximalKind::StrongNode;
        case CanardBranch::NodeWeak: return MaximalKind::WeakNode;
        default: return MaximalKind::FoldedSaddle;
    }
}

}  // namespace

MaximalCanard maximal_canard(const FlowContext& ctx, const SingularCanard& singular_guess,
                             const CanardSettings& settings) {
    if (!(ctx.sys().delta() > 0.0))
        throw DomainError("maximal_canard requires delta > 0");
    const auto& forcing = ctx.forcing();
    const double tau_star = singular_guess.singularity.tau_star;

    // restrict the singular path to its attracting-side segment connected to
    // the singularity; the weak-node branch veers off the true weak canard
    // away from the singularity, so its usable reach is short
    std::vector<TrajectorySample> pre;
    for (const auto& s : singular_guess.path)
        if (s.t < tau_star) pre.push_back(s);
    size_t k = pre.size();
    while (k > 0 &&
           ctx.sys().fx(pre[k - 1].x, pre[k - 1].y, pre[k - 1].lambda) < 0.0)
        --k;
    pre.erase(pre.begin(), pre.begin() + k);
    if (pre.size() < 2)
        throw SectionError("singular canard has no attracting-side segment to seed from");
    const double lo_reach = pre.front().t;

    double offset = settings.section_offset;
    if (singular_guess.branch == CanardBranch::NodeWeak)
        offset = std::min(offset, 0.25);
    double tau_sec = tau_star - offset;
    tau_sec = std::max(tau_sec, lo_reach + 0.05 * (tau_star - lo_reach));
    tau_sec = std::min(tau_sec, tau_star - 1e-3);
    if (std::isfinite(forcing.tau_min())) tau_sec = std::max(tau_sec, forcing.tau_min());
    const double lambda_sec = forcing.lambda(tau_sec);
    const double x_guess = PathInterp::from_samples(pre).x_at(tau_sec);

    // keep the section on the attracting side of the fold
    const double x_fold = ctx.fold_at(lambda_sec).x_F;
    const double toward_fold = x_fold > x_guess ? 1.0 : -1.0;
    double x_lo = x_guess - settings.section_halfwidth;
    double x_hi = x_guess + settings.section_halfwidth;
    if (toward_fold > 0)
        x_hi = std::min(x_hi, x_fold - 1e-6);
    else
        x_lo = std::max(x_lo, x_fold + 1e-6);

    // pre-scan the section for the jump dichotomy, taking the flip closest to
    // the singular canard's crossing
    const int n = std::max(3, settings.section_nodes);
    std::vector<double> xs(n);
    std::vector<int> side(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = x_lo + (x_hi - x_lo) * i / (n - 1);
        side[i] = jump_side(ctx, xs[i], lambda_sec, tau_sec, settings.integrator);
    }
    int flip = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < n; ++i) {
        if (side[i] == side[i + 1]) continue;
        const double mid = 0.5 * (xs[i] + xs[i + 1]);
        if (std::abs(mid - x_guess) < best) {
            best = std::abs(mid - x_guess);
            flip = i;
        }
    }
    if (flip < 0)
        throw SectionError("no jump dichotomy on the seed section at tau = " +
                           std::to_string(tau_sec) + ", x in [" + std::to_string(x_lo) +
                           ", " + std::to_string(x_hi) + "]");

    double a = xs[flip], b = xs[flip + 1];
    const int side_a = side[flip];
    while (b - a > 1e-10) {
        const double mid = 0.5 * (a + b);
        if (jump_side(ctx, mid, lambda_sec, tau_sec, settings.integrator) == side_a)
            a = mid;
        else
            b = mid;
    }

    MaximalCanard mc;
    mc.seed_parameter = 0.5 * (a + b);
    mc.section_tau = tau_sec;
    mc.section_lambda = lambda_sec;
    mc.seed_tolerance = 0.5 * (b - a);
    mc.kind = kind_from_branch(singular_guess.branch);
    mc.path = seed_trajectory(ctx, mc.seed_parameter, lambda_sec, tau_sec,
                              settings.integrator);
    mc.dwell_s_r = mc.path.dwell_s_r;
    return mc;
}

std::vector<MaximalCanard> secondary_canards(const FlowContext& ctx,
                                             const BandStructure& bands,
                                             const MaximalCanard& strong,
                                             const MaximalCanard& weak,
                                             const CanardSettings& settings) {
    std::vector<MaximalCanard> out;
    const double tau0 = bands.transect_tau;
    const double lam0 = bands.transect_lambda;

    // traces of the primaries on the transect, when their trajectories cover it
    std::vector<double> primary_traces;
    for (const MaximalCanard* p : {&strong, &weak}) {
        if (std::abs(p->section_tau - tau0) <= 1e-12)
            primary_traces.push_back(p->seed_parameter);
        else if (!p->path.samples.empty()) {
            const PathInterp pi = PathInterp::from_samples(p->path.samples);
            if (pi.covers(tau0)) primary_traces.push_back(pi.x_at(tau0));
        }
    }

    // upper edges of narrow tracked bands flanked by destabilized bands are
    // composite candidates, not plain secondaries
    std::vector<double> composite_edges;
    for (size_t bi = 1; bi + 1 < bands.bands.size(); ++bi) {
        const Band& b = bands.bands[bi];
        if (b.verdict == Verdict::Tracked && b.width() <= 0.1 &&
            bands.bands[bi - 1].verdict == Verdict::Destabilized &&
            bands.bands[bi + 1].verdict == Verdict::Destabilized)
            composite_edges.push_back(b.x_hi);
    }

    for (const double x_b : bands.boundaries) {
        bool skip = false;
        for (double t : primary_traces)
            if (std::abs(x_b - t) < 0.02) skip = true;
        for (double e : composite_edges)
            if (std::abs(x_b - e) < 1e-13) skip = true;
        if (skip) continue;

        MaximalCanard mc;
        mc.seed_parameter = x_b;
        mc.section_tau = tau0;
        mc.section_lambda = lam0;
        mc.seed_tolerance = 1e-8;
        mc.kind = MaximalKind::SecondaryNode;
        mc.path = seed_trajectory(ctx, x_b, lam0, tau0, settings.integrator);
        mc.dwell_s_r = mc.path.dwell_s_r;
        if (mc.dwell_s_r < 0.02) continue;  // a flip with no canard dwell
        out.push_back(std::move(mc));
    }
    return out;
}

std::vector<MaximalCanard> detect_composites(const FlowContext& ctx,
                                             const BandStructure& bands,
                                             const std::vector<MaximalCanard>& canards,
                                             const std::vector<SingularCanard>& singular,
                                             const CanardSettings& settings) {
    struct Template {
        std::string label;
        PathInterp path;
    };
    std::vector<Template> templates;
    for (const auto& s : singular) {
        if (!s.is_true_canard()) continue;
        templates.push_back({to_string(s.branch), PathInterp::from_samples(s.path)});
    }
    for (const auto& m : canards) {
        if (m.kind == MaximalKind::Composite || m.path.samples.empty()) continue;
        templates.push_back({to_string(m.kind), PathInterp::from_samples(m.path.samples)});
    }

    const auto is_node_label = [](const std::string& l) {
        return l == "node-strong" || l == "node-weak" || l == "strong-node" ||
               l == "weak-node" || l == "secondary-node";
    };
    const auto is_saddle_label = [](const std::string& l) {
        return l == "saddle-stable" || l == "folded-saddle";
    };

    std::vector<MaximalCanard> out;
    for (size_t bi = 0; bi < bands.bands.size(); ++bi) {
        const Band& band = bands.bands[bi];
        if (band.verdict != Verdict::Tracked) continue;
        if (bi == 0 || bi + 1 == bands.bands.size()) continue;
        if (bands.bands[bi - 1].verdict != Verdict::Destabilized ||
            bands.bands[bi + 1].verdict != Verdict::Destabilized)
            continue;
        if (band.width() > 0.1) continue;  // only narrow tracked bands

        const double x_b = band.x_hi;  // upper boundary
        const Trajectory traj = seed_trajectory(ctx, x_b, bands.transect_lambda,
                                                bands.transect_tau, settings.integrator);
        const PathInterp bp = PathInterp::from_samples(traj.samples);
        if (bp.pts.size() < 2) continue;

        const double t0 = bp.pts.front().first, t1 = bp.pts.back().first;
        const int m = std::max(2, static_cast<int>((t1 - t0) / 0.01));
        // y alongside x, to test whether the trajectory is still slaved to
        // the critical manifold
        PathInterp by;
        for (const auto& s : traj.samples) {
            if (!by.pts.empty() && s.t <= by.pts.back().first) continue;
            by.pts.push_back({s.t, s.y});
        }
        // a template numerically identical to this boundary (its own twin
        // edge of a sub-resolution band) carries no information
        std::vector<char> excluded(templates.size(), 0);
        for (size_t ti = 0; ti < templates.size(); ++ti)
            if (templates[ti].path.covers(bands.transect_tau) &&
                std::abs(templates[ti].path.x_at(bands.transect_tau) - x_b) < 1e-6)
                excluded[ti] = 1;
        // once the trajectory has left the repelling side for good it simply
        // rejoins the attracting slow attractor, and shadowing past that
        // point is trivial coincidence
        double tau_cut = t1;
        {
            double last = -std::numeric_limits<double>::infinity();
            for (const auto& s : traj.samples)
                if (s.x >= ctx.fold_at(s.lambda).x_F) last = std::max(last, s.t);
            if (std::isfinite(last)) tau_cut = std::min(t1, last + 0.05);
        }
        // sample admissibility: away from the moving stable state and still
        // slaved to the critical manifold (the fast-field residual |f| stays
        // small on either sheet; x-distance would blow up near the fold)
        std::vector<double> taus(m + 1), xs(m + 1);
        std::vector<char> ok(m + 1, 0);
        for (int k = 0; k <= m; ++k) {
            taus[k] = t0 + (t1 - t0) * k / m;
            xs[k] = bp.x_at(taus[k]);
            const double lam = ctx.forcing().lambda(taus[k]);
            const double x_eq = ctx.equilibrium_at(lam).first;
            const double resid = std::abs(ctx.sys().f_at(xs[k], by.x_at(taus[k]), lam));
            ok[k] = taus[k] <= tau_cut && std::abs(xs[k] - x_eq) > settings.tube &&
                    resid <= settings.tube;
        }

        // coverage runs per template label: templates of one canard family
        // may nearly coincide, so a sample supports a label when any template
        // carrying it is within the tube
        std::vector<std::string> labels;
        for (size_t ti = 0; ti < templates.size(); ++ti)
            if (!excluded[ti] && std::find(labels.begin(), labels.end(),
                                           templates[ti].label) == labels.end())
                labels.push_back(templates[ti].label);
        std::vector<CanardSegment> segs;
        for (const auto& label : labels) {
            int start = -1;
            for (int k = 0; k <= m; ++k) {
                bool in = false;
                if (ok[k])
                    for (size_t ti = 0; ti < templates.size() && !in; ++ti)
                        in = !excluded[ti] && templates[ti].label == label &&
                             templates[ti].path.covers(taus[k]) &&
                             std::abs(xs[k] - templates[ti].path.x_at(taus[k])) <=
                                 settings.tube;
                if (in && start < 0) start = k;
                if ((!in || k == m) && start >= 0) {
                    const int end = in ? k : k - 1;
                    if (taus[end] - taus[start] >= kMinShadowRun)
                        segs.push_back({label, taus[start], taus[end]});
                    start = -1;
                }
            }
        }
        std::sort(segs.begin(), segs.end(),
                  [](const auto& a, const auto& b) { return a.tau_lo < b.tau_lo; });

#ifdef FASTSLOW_DEBUG_COMPOSITES
        std::fprintf(stderr, "band %zu x_b=%.12f tau_cut=%.3f\n", bi, x_b, tau_cut);
        for (auto& sg : segs)
            std::fprintf(stderr, "  seg %s [%.3f, %.3f]\n", sg.label.c_str(), sg.tau_lo,
                         sg.tau_hi);
#endif
        bool node_then_saddle = false;
        for (size_t s = 0; s < segs.size() && !node_then_saddle; ++s)
            if (is_node_label(segs[s].label))
                for (size_t s2 = s + 1; s2 < segs.size(); ++s2)
                    if (is_saddle_label(segs[s2].label)) {
                        node_then_saddle = true;
                        break;
                    }
        if (!node_then_saddle) continue;

        MaximalCanard mc;
        mc.seed_parameter = x_b;
        mc.section_tau = bands.transect_tau;
        mc.section_lambda = bands.transect_lambda;
        mc.kind = MaximalKind::Composite;
        mc.path = traj;
        mc.dwell_s_r = traj.dwell_s_r;
        mc.segments = std::move(segs);
        out.push_back(std::move(mc));
    }
    return out;
}

}  // namespace fastslow
