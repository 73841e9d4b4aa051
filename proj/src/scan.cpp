#include "fastslow/scan.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fastslow/rootfind.hpp"

namespace fastslow {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

IntegratorSettings quiet_settings(const IntegratorSettings& s) {
    IntegratorSettings q = s;
    q.record_samples = false;
    q.track_dwell = false;
    return q;
}

std::optional<std::pair<double, double>> project(const FlowContext& ctx, double x0,
                                                 double lambda0, ManifoldSide side) {
    ProjectionOptions opts;
    opts.allow_repelling = side == ManifoldSide::Repelling;
    opts.x_range = ctx.x_range();
    try {
        return project_onto_s_attracting(ctx.sys(), x0, lambda0, opts);
    } catch (const SideError&) {
        return std::nullopt;
    } catch (const AssumptionError&) {
        return std::nullopt;
    }
}

int column_index(const ScanGrid& grid, double transect_lambda) {
    int best = 0;
    double best_d = std::abs(grid.lambdas[0] - transect_lambda);
    for (int i = 1; i < grid.spec.n_lambda; ++i) {
        const double d = std::abs(grid.lambdas[i] - transect_lambda);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

Verdict classify_point(const FlowContext& ctx, double x0, double lambda0,
                       ManifoldSide side, const IntegratorSettings& settings) {
    double tau0;
    try {
        tau0 = ctx.forcing().tau_from_lambda(lambda0);
    } catch (const DomainError&) {
        return Verdict::Exhausted;
    }
    const auto p = project(ctx, x0, lambda0, side);
    if (!p) return Verdict::Exhausted;
    try {
        return integrate_full(ctx, p->first, p->second, tau0, quiet_settings(settings))
            .verdict;
    } catch (const StiffnessError&) {
        return Verdict::Exhausted;
    }
}

double dwell_of_point(const FlowContext& ctx, double x0, double lambda0,
                      ManifoldSide side, const IntegratorSettings& settings) {
    double tau0;
    try {
        tau0 = ctx.forcing().tau_from_lambda(lambda0);
    } catch (const DomainError&) {
        return 0.0;
    }
    const auto p = project(ctx, x0, lambda0, side);
    if (!p) return 0.0;
    IntegratorSettings s = settings;
    s.record_samples = false;
    s.track_dwell = true;
    try {
        return integrate_full(ctx, p->first, p->second, tau0, s).dwell_s_r;
    } catch (const StiffnessError&) {
        return 0.0;
    }
}

ScanGrid classify_grid(const FlowContext& ctx, const GridSpec& spec,
                       const IntegratorSettings& settings, int workers) {
    if (spec.n_x < 1 || spec.n_lambda < 1)
        throw ConfigError("grid must have at least one cell per axis");
    ScanGrid grid;
    grid.spec = spec;
    grid.lambdas = linspace(spec.lambda_lo, spec.lambda_hi, spec.n_lambda);
    grid.xs = linspace(spec.x_lo, spec.x_hi, spec.n_x);
    const size_t n_cells = static_cast<size_t>(spec.n_lambda) * spec.n_x;
    grid.cells.assign(n_cells, Verdict::Exhausted);

    const auto run_block = [&](size_t lo, size_t hi) {
        for (size_t c = lo; c < hi; ++c) {
            const int il = static_cast<int>(c) / spec.n_x;
            const int ix = static_cast<int>(c) % spec.n_x;
            grid.cells[c] =
                classify_point(ctx, grid.xs[ix], grid.lambdas[il], spec.side, settings);
        }
    };

    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n_cells)));
    if (nw == 1) {
        run_block(0, n_cells);
    } else {
        // static block partition: identical work assignment every run
        std::vector<std::thread> pool;
        pool.reserve(nw);
        const size_t chunk = (n_cells + nw - 1) / nw;
        for (int w = 0; w < nw; ++w) {
            const size_t lo = w * chunk;
            const size_t hi = std::min(n_cells, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_block, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    size_t n_exhausted = 0;
    for (const auto v : grid.cells)
        if (v == Verdict::Exhausted) ++n_exhausted;
    grid.exhausted_fraction = static_cast<double>(n_exhausted) / n_cells;
    grid.reliable = grid.exhausted_fraction <= 0.01;
    return grid;
}

namespace {

// Bisects a tracked/destabilized flip between x_lo and x_hi to |dx| <= 1e-8.
double refine_boundary(const FlowContext& ctx, double lambda0, ManifoldSide side,
                       double x_lo, Verdict v_lo, double x_hi,
                       const IntegratorSettings& settings, double xtol = 1e-8) {
    while (x_hi - x_lo > xtol) {
        const double mid = 0.5 * (x_lo + x_hi);
        const Verdict vm = classify_point(ctx, mid, lambda0, side, settings);
        if (vm == v_lo)
            x_lo = mid;
        else
            x_hi = mid;
    }
    return 0.5 * (x_lo + x_hi);
}

// A recovered sub-resolution tracked band: refined edges plus a point known
// to track inside it (the witness pins the verdict even when the band is
// narrower than the edge tolerance).
struct RecoveredBand {
    double lo = 0.0;
    double hi = 0.0;
    double witness = 0.0;
};

// Walks outward from a tracked point until the verdict flips, then bisects.
std::optional<double> tracked_edge(const FlowContext& ctx, double lambda0,
                                   ManifoldSide side, double x_tracked, int sgn,
                                   double first_step, double x_lo, double x_hi,
                                   const IntegratorSettings& settings) {
    double out = x_tracked;
    double step = first_step;
    Verdict v = Verdict::Tracked;
    while (v == Verdict::Tracked) {
        const double next = out + sgn * step;
        if (next <= x_lo || next >= x_hi) return std::nullopt;
        out = next;
        step *= 2.0;
        v = classify_point(ctx, out, lambda0, side, settings);
    }
    if (v != Verdict::Destabilized) return std::nullopt;
    const double a = std::min(out, x_tracked), b = std::max(out, x_tracked);
    const Verdict v_a = a == x_tracked ? Verdict::Tracked : Verdict::Destabilized;
    // tighter than the generic boundary tolerance so that slivers much
    // narrower than 1e-8 keep two distinct edges
    return refine_boundary(ctx, lambda0, side, a, v_a, b, settings, 1e-13);
}

// Recovers tracked bands narrower than the probing resolution inside a
// destabilized interval: the S^r dwell time peaks at the hidden maximal
// canard, so each interior dwell maximum is sharpened and its neighborhood
// probed on a logarithmic ladder for tracked verdicts.
void recover_narrow_bands(const FlowContext& ctx, double lambda0, ManifoldSide side,
                          double x_lo, double x_hi, const IntegratorSettings& settings,
                          std::vector<RecoveredBand>& recovered) {
    const int n_probe = 48;
    if (!(x_hi - x_lo > 1e-7)) return;
    std::vector<double> xs(n_probe), dw(n_probe);
    for (int i = 0; i < n_probe; ++i) {
        xs[i] = x_lo + (x_hi - x_lo) * (i + 1) / (n_probe + 1);
        dw[i] = dwell_of_point(ctx, xs[i], lambda0, side, settings);
    }
    for (int i = 1; i + 1 < n_probe; ++i) {
        if (!(dw[i] > dw[i - 1] && dw[i] > dw[i + 1])) continue;
        if (dw[i] <= 1e-3) continue;  // noise floor
        // sharpen the dwell peak to the canard seed
        const double x_c = refine_extremum(
            [&](double x) { return dwell_of_point(ctx, x, lambda0, side, settings); },
            xs[i - 1], xs[i + 1], true, 1e-12);
        double x_tracked = 0.0;
        bool found = false;
        if (classify_point(ctx, x_c, lambda0, side, settings) == Verdict::Tracked) {
            x_tracked = x_c;
            found = true;
        }
        for (const int sgn : {-1, +1}) {
            if (found) break;
            for (double step = 1e-10; step <= 2e-2; step *= 4.0) {
                const double x = x_c + sgn * step;
                if (x <= x_lo || x >= x_hi) break;
                if (classify_point(ctx, x, lambda0, side, settings) == Verdict::Tracked) {
                    x_tracked = x;
                    found = true;
                    break;
                }
            }
        }
        if (!found) continue;
        const double first_step = std::max(1e-10, std::abs(x_tracked - x_c));
        const auto lo_edge = tracked_edge(ctx, lambda0, side, x_tracked, -1, first_step,
                                          x_lo, x_hi, settings);
        const auto hi_edge = tracked_edge(ctx, lambda0, side, x_tracked, +1, first_step,
                                          x_lo, x_hi, settings);
        if (lo_edge && hi_edge && *lo_edge < *hi_edge)
            recovered.push_back({*lo_edge, *hi_edge, x_tracked});
    }
}

BandStructure assemble_bands(const FlowContext& ctx, double lambda0, ManifoldSide side,
                             double x_lo, double x_hi, std::vector<double> boundaries,
                             const std::vector<RecoveredBand>& recovered,
                             const IntegratorSettings& settings) {
    for (const auto& r : recovered) {
        boundaries.push_back(r.lo);
        boundaries.push_back(r.hi);
    }
    std::sort(boundaries.begin(), boundaries.end());
    boundaries.erase(std::unique(boundaries.begin(), boundaries.end(),
                                 [](double a, double b) { return b - a <= 1e-13; }),
                     boundaries.end());
    BandStructure bs;
    bs.transect_lambda = lambda0;
    bs.transect_tau = ctx.forcing().tau_from_lambda(lambda0);
    bs.boundaries = boundaries;
    std::vector<double> edges;
    edges.push_back(x_lo);
    edges.insert(edges.end(), boundaries.begin(), boundaries.end());
    edges.push_back(x_hi);
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        Band band;
        band.x_lo = edges[i];
        band.x_hi = edges[i + 1];
        // a witness inside the band pins the verdict; otherwise probe the mid
        band.verdict = Verdict::Exhausted;
        for (const auto& r : recovered)
            if (r.witness >= band.x_lo && r.witness <= band.x_hi) {
                band.verdict = Verdict::Tracked;
                break;
            }
        if (band.verdict == Verdict::Exhausted)
            band.verdict = classify_point(ctx, 0.5 * (edges[i] + edges[i + 1]), lambda0,
                                          side, settings);
        bs.bands.push_back(band);
    }
    return bs;
}

BandStructure bands_from_column(const FlowContext& ctx, double lambda0, ManifoldSide side,
                                const std::vector<double>& xs,
                                const std::vector<Verdict>& verdicts, bool refine,
                                const IntegratorSettings& settings) {
    std::vector<double> boundaries;
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        const Verdict a = verdicts[i], b = verdicts[i + 1];
        if (a == b || a == Verdict::Exhausted || b == Verdict::Exhausted) continue;
        boundaries.push_back(refine
                                 ? refine_boundary(ctx, lambda0, side, xs[i], a,
                                                   xs[i + 1], settings)
                                 : 0.5 * (xs[i] + xs[i + 1]));
    }
    std::vector<RecoveredBand> recovered;
    if (refine) {
        // hunt for sub-resolution tracked bands inside destabilized runs
        std::vector<double> edges;
        edges.push_back(xs.front());
        edges.insert(edges.end(), boundaries.begin(), boundaries.end());
        edges.push_back(xs.back());
        for (size_t i = 0; i + 1 < edges.size(); ++i) {
            const double mid = 0.5 * (edges[i] + edges[i + 1]);
            if (classify_point(ctx, mid, lambda0, side, settings) ==
                Verdict::Destabilized)
                recover_narrow_bands(ctx, lambda0, side, edges[i], edges[i + 1], settings,
                                     recovered);
        }
    }
    return assemble_bands(ctx, lambda0, side, xs.front(), xs.back(),
                          std::move(boundaries), recovered, settings);
}

}  // namespace

BandStructure extract_bands(const FlowContext& ctx, const ScanGrid& grid,
                            double transect_lambda, bool refine,
                            const IntegratorSettings& settings) {
    const int il = column_index(grid, transect_lambda);
    const double lambda0 = grid.lambdas[il];
    std::vector<Verdict> col(grid.spec.n_x);
    for (int ix = 0; ix < grid.spec.n_x; ++ix) col[ix] = grid.at(il, ix);
    return bands_from_column(ctx, lambda0, grid.spec.side, grid.xs, col, refine,
                             settings);
}

BandStructure extract_bands_on_transect(const FlowContext& ctx, double transect_lambda,
                                        double x_lo, double x_hi, int n_cells,
                                        ManifoldSide side, bool refine,
                                        const IntegratorSettings& settings, int workers) {
    GridSpec spec;
    spec.n_x = n_cells;
    spec.n_lambda = 1;
    spec.x_lo = x_lo;
    spec.x_hi = x_hi;
    spec.lambda_lo = spec.lambda_hi = transect_lambda;
    spec.side = side;
    const ScanGrid grid = classify_grid(ctx, spec, settings, workers);
    return extract_bands(ctx, grid, transect_lambda, refine, settings);
}

namespace {

bool any_destabilized(const SystemDefinition& sys, const ForcingProfile& forcing,
                      const GridSpec& spec, const IntegratorSettings& settings) {
    const FlowContext ctx(sys, forcing);
    const auto lambdas = linspace(spec.lambda_lo, spec.lambda_hi, spec.n_lambda);
    const auto xs = linspace(spec.x_lo, spec.x_hi, spec.n_x);
    for (const double lam : lambdas)
        for (const double x : xs)
            if (classify_point(ctx, x, lam, spec.side, settings) ==
                Verdict::Destabilized)
                return true;
    return false;
}

}  // namespace

CriticalRateReport empirical_critical_rate(const SystemDefinition& sys,
                                           const ForcingProfile& forcing_family,
                                           double delta,
                                           std::pair<double, double> eps_bracket,
                                           const GridSpec& spec,
                                           const IntegratorSettings& settings,
                                           int /*workers*/) {
    const SystemDefinition sys_d = sys.with_delta(delta);
    auto probe = [&](double eps) {
        return any_destabilized(sys_d, forcing_family.with_epsilon(eps), spec, settings);
    };
    double lo = eps_bracket.first, hi = eps_bracket.second;
    if (probe(lo)) throw BracketError("destabilization already present at bracket bottom");
    if (!probe(hi)) throw BracketError("no destabilization at bracket top");
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid))
            hi = mid;
        else
            lo = mid;
    }
    CriticalRateReport report =
        estimate_critical_rate(sys, forcing_family, eps_bracket);
    report.epsilon_c_empirical = 0.5 * (lo + hi);
    report.E_delta = std::abs(*report.epsilon_c_empirical - report.epsilon_c_singular);
    return report;
}

std::vector<CriticalRateReport> critical_rate_convergence(
    const SystemDefinition& sys, const ForcingProfile& forcing_family,
    const std::vector<double>& deltas, std::pair<double, double> eps_bracket,
    const GridSpec& spec, const IntegratorSettings& settings, int workers) {
    std::vector<CriticalRateReport> reports;
    reports.reserve(deltas.size());
    for (const double d : deltas) {
        IntegratorSettings s = settings;
        s.stiff = s.stiff || d <= 2e-3;
        reports.push_back(
            empirical_critical_rate(sys, forcing_family, d, eps_bracket, spec, s, workers));
    }
    if (deltas.size() >= 2) {
        // least-squares slope of log E vs log delta
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (size_t i = 0; i < deltas.size(); ++i) {
            if (!reports[i].E_delta || *reports[i].E_delta <= 0.0) continue;
            const double lx = std::log(deltas[i]);
            const double ly = std::log(*reports[i].E_delta);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++n;
        }
        if (n >= 2) {
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            for (auto& r : reports) r.order_exponent = slope;
        }
    }
    return reports;
}

}  // namespace fastslow
