// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fastslow/canard.hpp"
#include "fastslow/scan.hpp"

using namespace fastslow;

namespace {

const double kLambdaMax = 2.5;
int g_failures = 0;

using Clock = std::chrono::steady_clock;

struct Criterion {
    const char* id;
    double budget_s;
    Clock::time_point t0 = Clock::now();
    bool ok = true;
    std::string detail;

    explicit Criterion(const char* id_, double budget) : id(id_), budget_s(budget) {}

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }

    void finish() {
        const double secs =
            std::chrono::duration<double>(Clock::now() - t0).count();
        if (ok && secs > budget_s) {
            ok = false;
            detail = "over time budget";
        }
        if (!ok) ++g_failures;
        std::printf("%s: %s (%.1f s)%s%s\n", id, ok ? "PASS" : "FAIL", secs,
                    detail.empty() ? "" : " — ", detail.c_str());
        std::fflush(stdout);
    }
};

template <class Fn>
void run(const char* id, double budget_s, Fn&& body) {
    Criterion c(id, budget_s);
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    c.finish();
}

std::pair<std::complex<double>, std::complex<double>> quad_roots(double q) {
    const std::complex<double> d = std::sqrt(std::complex<double>(1.0 - 4.0 * q, 0.0));
    return {(-1.0 + d) / 2.0, (-1.0 - d) / 2.0};
}

double eig_error(const FoldedSingularity& s, double q) {
    const auto [r1, r2] = quad_roots(q);
    const double d1 = std::max(std::abs(s.xi1 - r1), std::abs(s.xi2 - r2));
    const double d2 = std::max(std::abs(s.xi1 - r2), std::abs(s.xi2 - r1));
    return std::min(d1, d2);
}

double tanh_q(double eps, double lmax, double lam) {
    return -4.0 * eps * eps * lam * (1.0 - (lam / lmax) * (lam / lmax));
}

double exp_q(double eps, double lmax, double lam) { return 2.0 * eps * eps * (lam - lmax); }

IntegratorSettings scan_settings() {
    IntegratorSettings is;
    is.rel_tol = 1e-8;
    is.abs_tol = 1e-10;
    return is;
}

bool is_node_family(const std::string& label) {
    return label == "node-strong" || label == "node-weak" || label == "strong-node" ||
           label == "weak-node";
}

bool is_saddle_family(const std::string& label) {
    return label == "saddle-stable" || label == "folded-saddle";
}

// first tau at which a segment with the wanted label class starts; +inf if none
double first_start(const std::vector<CanardSegment>& segs,
                   bool (*pred)(const std::string&)) {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& s : segs)
        if (pred(s.label)) t = std::min(t, s.tau_lo);
    return t;
}

// interior tracked bands narrow enough to be canard-bounded slivers
std::vector<Band> narrow_tracked(const BandStructure& bands) {
    std::vector<Band> out;
    for (size_t i = 0; i + 1 < bands.bands.size(); ++i) {
        if (i == 0) continue;
        const auto& b = bands.bands[i];
        if (b.verdict == Verdict::Tracked && b.width() <= 0.1 &&
            bands.bands[i - 1].verdict == Verdict::Destabilized &&
            bands.bands[i + 1].verdict == Verdict::Destabilized)
            out.push_back(b);
    }
    return out;
}

}  // namespace

int main() {
    const auto sys0 = builtin_system("paper-example");         // singular limit
    const auto sys = builtin_system("paper-example", 0.01);    // delta = 0.01

    run("A1", 1.0, [&](Criterion& c) {
        const ForcingProfile family(ForcingKind::LogisticTanh, kLambdaMax, 1.0);
        const auto report = estimate_critical_rate(sys0, family, {0.05, 0.5});
        c.require(std::abs(report.epsilon_c_singular - 0.2) <= 1e-6,
                  "epsilon_c = " + std::to_string(report.epsilon_c_singular));
    });

    run("A2", 1.0, [&](Criterion& c) {
        const double eps = 0.216;
        const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, eps);
        const auto sing = find_folded_singularities(sys0, fp);
        c.require(sing.size() == 2, "expected 2 singularities, got " +
                                        std::to_string(sing.size()));
        if (!c.ok) return;
        const double lam_star =
            std::sqrt(kLambdaMax * (kLambdaMax - 1.0 / (2.0 * eps)));
        c.require(std::abs(sing[0].lambda_star + lam_star) <= 1e-6, "lambda* (negative)");
        c.require(std::abs(sing[1].lambda_star - lam_star) <= 1e-6, "lambda* (positive)");
        c.require(sing[0].kind == SingularityKind::FoldedNodeStable,
                  "negative branch should be a stable folded node, got " +
                      to_string(sing[0].kind));
        c.require(sing[1].kind == SingularityKind::FoldedSaddle,
                  "positive branch should be a folded saddle, got " +
                      to_string(sing[1].kind));
        for (const auto& s : sing)
            c.require(eig_error(s, tanh_q(eps, kLambdaMax, s.lambda_star)) <= 1e-8,
                      "eigenvalues off the characteristic polynomial");
    });

    run("A3", 1.0, [&](Criterion& c) {
        const double eps_nf =
            (2.0 + std::sqrt(4.0 + kLambdaMax * kLambdaMax)) / (8.0 * kLambdaMax);
        const ForcingProfile below(ForcingKind::LogisticTanh, kLambdaMax, eps_nf - 0.002);
        const ForcingProfile above(ForcingKind::LogisticTanh, kLambdaMax, eps_nf + 0.002);
        const auto sb = find_folded_singularities(sys0, below);
        const auto sa = find_folded_singularities(sys0, above);
        c.require(sb.size() == 2 && sa.size() == 2, "singularity count");
        if (!c.ok) return;
        c.require(sb[0].kind == SingularityKind::FoldedNodeStable,
                  "below the transition: " + to_string(sb[0].kind));
        c.require(sa[0].kind == SingularityKind::FoldedFocusStable,
                  "above the transition: " + to_string(sa[0].kind));
        c.require(singular_canards(sys0, above, sa[0]).empty(),
                  "a folded focus must have no singular canards");
    });

    run("A4", 1.0, [&](Criterion& c) {
        const double eps = 1.0;
        const ForcingProfile fp(ForcingKind::ExponentialApproach, kLambdaMax, eps);
        const auto sing = find_folded_singularities(sys0, fp);
        c.require(sing.size() == 1, "expected 1 singularity, got " +
                                        std::to_string(sing.size()));
        if (!c.ok) return;
        c.require(sing[0].kind == SingularityKind::FoldedSaddle, to_string(sing[0].kind));
        c.require(std::abs(sing[0].lambda_star - 2.0) <= 1e-6, "lambda* != 2.0");
        c.require(eig_error(sing[0], exp_q(eps, kLambdaMax, sing[0].lambda_star)) <= 1e-8,
                  "eigenvalues off the characteristic polynomial");
    });

    run("A5", 120.0, [&](Criterion& c) {
        const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.06);
        const FlowContext ctx(sys, fp);
        GridSpec spec;
        spec.n_x = 100;
        spec.n_lambda = 100;
        spec.x_lo = -1.5;
        spec.x_hi = 0.45;
        spec.lambda_lo = -2.3;
        spec.lambda_hi = 2.3;
        const auto grid = classify_grid(ctx, spec, scan_settings(), 1);
        int tracked = 0;
        for (const auto v : grid.cells) tracked += (v == Verdict::Tracked);
        c.require(tracked == 100 * 100,
                  std::to_string(tracked) + "/10000 tracked");
    });

    run("A6", 300.0, [&](Criterion& c) {
        const ForcingProfile fp(ForcingKind::ExponentialApproach, kLambdaMax, 1.0);
        const FlowContext ctx(sys, fp);
        const auto is = scan_settings();
        // threshold simplicity: at most one boundary on every transect
        for (int k = 0; k < 20; ++k) {
            const double lam = 0.05 + k * (2.40 / 19.0);
            const auto b = extract_bands_on_transect(ctx, lam, -1.5, 0.45, 100,
                                                     ManifoldSide::Attracting, true, is, 1);
            c.require(b.boundaries.size() <= 1,
                      "transect lambda = " + std::to_string(lam) + " has " +
                          std::to_string(b.boundaries.size()) + " boundaries");
            if (!c.ok) return;
        }
        // the boundary follows the saddle maximal canard away from the fold
        CanardSettings cs;
        cs.integrator = is;
        const auto& s = ctx.singularities();
        c.require(s.size() == 1, "singularity count");
        if (!c.ok) return;
        const auto sing_canards = singular_canards(sys, fp, s[0], cs);
        const auto it =
            std::find_if(sing_canards.begin(), sing_canards.end(),
                         [](const auto& sc) { return sc.is_true_canard(); });
        c.require(it != sing_canards.end(), "no true saddle canard");
        if (!c.ok) return;
        const auto mc = maximal_canard(ctx, *it, cs);
        // comparison points on the canard trace: monotone-tau prefix, on the
        // attracting side away from the fold, inside the scan window
        std::vector<TrajectorySample> pts;
        for (size_t i = 0; i < mc.path.samples.size(); ++i) {
            const auto& p = mc.path.samples[i];
            if (i > 0 && p.t <= mc.path.samples[i - 1].t) break;
            // fold margin: close to the fold the release time nears the
            // singularity and the destabilized sliver leaves the scan window
            if (p.x >= 0.3) break;
            if (p.x < -1.4) continue;
            if (p.lambda <= 0.02 || p.lambda >= 2.45) continue;
            pts.push_back(p);
        }
        c.require(pts.size() >= 20, "only " + std::to_string(pts.size()) +
                                        " usable points on the canard trace");
        if (!c.ok) return;
        int checked = 0;
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const auto& p = pts[k * (pts.size() - 1) / 19];
            const auto b = extract_bands_on_transect(ctx, p.lambda, -1.5, 0.45, 100,
                                                     ManifoldSide::Attracting, true, is, 1);
            if (b.boundaries.size() != 1) {
                c.require(false, "no single boundary at lambda = " +
                                     std::to_string(p.lambda));
                return;
            }
            worst = std::max(worst, std::abs(b.boundaries[0] - p.x));
            ++checked;
        }
        c.require(checked == 20 && worst <= 0.03,
                  "max |boundary - canard| = " + std::to_string(worst));
    });

    run("A7", 1200.0, [&](Criterion& c) {
        const auto is = scan_settings();
        {
            const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.201);
            const FlowContext ctx(sys, fp);
            const auto b = extract_bands_on_transect(ctx, -0.7, -1.5, 0.45, 200,
                                                     ManifoldSide::Attracting, true, is, 1);
            c.require(b.count(Verdict::Destabilized) == 1,
                      "eps = 0.201: expected exactly 1 destabilized band, got " +
                          std::to_string(b.count(Verdict::Destabilized)));
            c.require(b.bands.size() == 3, "eps = 0.201: expected 3 bands total");
        }
        {
            const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.204);
            const FlowContext ctx(sys, fp);
            const auto b = extract_bands_on_transect(ctx, -0.7, -1.5, 0.45, 200,
                                                     ManifoldSide::Attracting, true, is, 1);
            c.require(b.count(Verdict::Destabilized) >= 3,
                      "eps = 0.204: expected >= 3 destabilized bands, got " +
                          std::to_string(b.count(Verdict::Destabilized)));
            c.require(narrow_tracked(b).size() >= 2,
                      "eps = 0.204: expected >= 2 narrow tracked bands, got " +
                          std::to_string(narrow_tracked(b).size()));
        }
        {
            const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.270);
            const FlowContext ctx(sys, fp);
            const auto b = extract_bands_on_transect(ctx, -0.7, -1.5, 0.45, 200,
                                                     ManifoldSide::Attracting, true, is, 1);
            c.require(b.boundaries.size() == 1,
                      "eps = 0.270: expected exactly 1 boundary, got " +
                          std::to_string(b.boundaries.size()));
        }
    });

    run("A8", 600.0, [&](Criterion& c) {
        const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.204);
        const FlowContext ctx(sys, fp);
        CanardSettings cs;
        cs.integrator = scan_settings();
        std::vector<SingularCanard> singular;
        for (const auto& s : ctx.singularities())
            for (auto& sc : singular_canards(sys, fp, s, cs))
                singular.push_back(std::move(sc));
        std::vector<MaximalCanard> maximal;
        for (const auto& sc : singular) {
            if (!sc.is_true_canard()) continue;
            maximal.push_back(maximal_canard(ctx, sc, cs));
        }
        const MaximalCanard* strong = nullptr;
        const MaximalCanard* weak = nullptr;
        for (const auto& m : maximal) {
            if (m.kind == MaximalKind::StrongNode) strong = &m;
            if (m.kind == MaximalKind::WeakNode) weak = &m;
        }
        c.require(strong && weak, "missing strong/weak node maximal canards");
        if (!c.ok) return;
        const auto bands = extract_bands_on_transect(ctx, -0.7, -1.5, 0.45, 200,
                                                     ManifoldSide::Attracting, true,
                                                     cs.integrator, 1);
        for (auto& m : secondary_canards(ctx, bands, *strong, *weak, cs))
            maximal.push_back(std::move(m));
        const auto narrow = narrow_tracked(bands);
        c.require(narrow.size() >= 2, "fewer than 2 narrow tracked bands");
        if (!c.ok) return;
        const auto composites = detect_composites(ctx, bands, maximal, singular, cs);
        auto find_comp = [&](double x_b) -> const MaximalCanard* {
            for (const auto& m : composites)
                if (std::abs(m.seed_parameter - x_b) <= 1e-9) return &m;
            return nullptr;
        };
        const auto* c1 = find_comp(narrow[0].x_hi);
        const auto* c2 = find_comp(narrow[1].x_hi);
        c.require(c1 != nullptr, "first narrow band's upper edge not composite");
        c.require(c2 != nullptr, "second narrow band's upper edge not composite");
        if (!c.ok) return;
        // first composite: a node canard stretch, then the saddle canard
        const double n1 = first_start(c1->segments, is_node_family);
        const double s1 = first_start(c1->segments, is_saddle_family);
        c.require(std::isfinite(n1) && std::isfinite(s1) && n1 < s1,
                  "first composite is not (node canard, then saddle canard)");
        // second composite: a secondary-node stretch, then the saddle canard
        const double n2 = first_start(c2->segments, [](const std::string& l) {
            return l == "secondary-node";
        });
        const double s2 = first_start(c2->segments, is_saddle_family);
        c.require(std::isfinite(n2) && std::isfinite(s2) && n2 < s2,
                  "second composite is not (secondary canard, then saddle canard)");
    });

    run("A9", 60.0, [&](Criterion& c) {
        // (a) desingularized vs reduced flow coincide as curves on S^a
        std::mt19937 rng(20260823);
        std::uniform_real_distribution<double> ux(-1.4, 0.3);
        IntegratorSettings is;
        is.rel_tol = 1e-11;
        is.abs_tol = 1e-13;
        is.max_step = 5e-4;  // keeps polyline interpolation error below the bound
        const std::vector<ForcingProfile> profiles = {
            ForcingProfile(ForcingKind::LogisticTanh, kLambdaMax, 0.15),
            ForcingProfile(ForcingKind::ExponentialApproach, kLambdaMax, 0.15),
        };
        for (const auto& fp : profiles) {
            std::uniform_real_distribution<double> ut(fp.tau_min() == 0.0 ? 0.1 : -2.0,
                                                      1.5);
            for (int n = 0; n < 20; ++n) {
                const double x0 = ux(rng), tau0 = ut(rng);
                IntegratorSettings red = is;
                red.horizon = tau0 + 1.5;
                red.horizon_slack = 0.0;
                const auto r = integrate_reduced(sys0, fp, x0, tau0, red);
                const auto d = integrate_desing(sys0, fp, x0, tau0, 60.0, is);
                const double t_lo = tau0;
                const double t_hi = std::min(r.samples.back().t, d.samples.back().t);
                c.require(t_hi > t_lo + 0.1, "curves too short to compare");
                if (!c.ok) return;
                auto x_on = [](const Trajectory& tr, double t) {
                    for (size_t i = 0; i + 1 < tr.samples.size(); ++i) {
                        const auto &a = tr.samples[i], &b = tr.samples[i + 1];
                        if (t >= a.t && t <= b.t)
                            return a.x + (b.x - a.x) * (t - a.t) /
                                             std::max(b.t - a.t, 1e-300);
                    }
                    return tr.samples.back().x;
                };
                double worst = 0.0;
                for (int k = 0; k <= 200; ++k) {
                    const double t = t_lo + (t_hi - t_lo) * k / 200.0;
                    worst = std::max(worst, std::abs(x_on(r, t) - x_on(d, t)));
                }
                c.require(worst <= 1e-6,
                          "curve distance " + std::to_string(worst) + " > 1e-6");
                if (!c.ok) return;
            }
        }
        // (b) eigenvalues solve the characteristic polynomials on random draws
        std::uniform_real_distribution<double> ueps(0.15, 1.3);
        std::uniform_real_distribution<double> ulmax(1.2, 3.5);
        int checked = 0;
        double worst = 0.0;
        while (checked < 100) {
            const double eps = ueps(rng), lmax = ulmax(rng);
            const ForcingProfile f1(ForcingKind::LogisticTanh, lmax, eps);
            for (const auto& s : find_folded_singularities(sys0, f1)) {
                worst = std::max(worst, eig_error(s, tanh_q(eps, lmax, s.lambda_star)));
                ++checked;
            }
            const ForcingProfile f2(ForcingKind::ExponentialApproach, lmax, eps);
            for (const auto& s : find_folded_singularities(sys0, f2)) {
                worst = std::max(worst, eig_error(s, exp_q(eps, lmax, s.lambda_star)));
                ++checked;
            }
        }
        c.require(worst <= 1e-8, "max eigenvalue defect " + std::to_string(worst));
    });

    run("A10", 900.0, [&](Criterion& c) {
        const ForcingProfile family(ForcingKind::LogisticTanh, kLambdaMax, 1.0);
        GridSpec spec;
        spec.n_x = 10;
        spec.n_lambda = 10;
        spec.x_lo = -1.5;
        spec.x_hi = 0.45;
        spec.lambda_lo = -2.3;
        spec.lambda_hi = 2.3;
        IntegratorSettings is = scan_settings();
        is.stiff = true;  // delta down to 1e-4
        const auto reports = critical_rate_convergence(
            sys0, family, {1e-2, 1e-3, 1e-4}, {0.12, 0.25}, spec, is, 1);
        c.require(reports.size() == 3, "report count");
        if (!c.ok) return;
        std::vector<double> ec;
        for (const auto& r : reports) {
            c.require(r.epsilon_c_empirical.has_value(), "missing empirical rate");
            if (!c.ok) return;
            ec.push_back(*r.epsilon_c_empirical);
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "eps_c = %.4f, %.4f, %.4f", ec[0], ec[1], ec[2]);
        const double slack = 2e-4;  // bisection width
        c.require(ec[0] <= ec[1] + slack && ec[1] <= ec[2] + slack,
                  std::string("not increasing: ") + buf);
        c.require(ec[2] <= 0.2 + 1e-3, std::string("overshoots the singular rate: ") + buf);
        c.require(reports[0].order_exponent.has_value(), "missing fitted exponent");
        if (!c.ok) return;
        const double p = *reports[0].order_exponent;
        c.require(p >= 0.10 && p <= 0.40,
                  "fitted exponent " + std::to_string(p) + " outside [0.10, 0.40]");
    });

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
