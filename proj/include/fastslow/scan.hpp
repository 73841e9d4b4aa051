#pragma once

#include <string>
#include <vector>

#include "fastslow/desing.hpp"
#include "fastslow/flow.hpp"
#include "fastslow/geometry.hpp"

namespace fastslow {

/// Grid of initial conditions in the (lambda, x) plane. Each lambda column is
/// mapped to its release time tau0 through the forcing's analytic inverse and
/// each x is projected onto the chosen side of the critical manifold.
struct GridSpec {
    int n_x = 200;
    int n_lambda = 200;
    double x_lo = 0.0;
    double x_hi = 0.0;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    ManifoldSide side = ManifoldSide::Attracting;
};

struct ScanGrid {
    GridSpec spec;
    std::vector<double> lambdas;  // size n_lambda
    std::vector<double> xs;       // size n_x
    std::vector<Verdict> cells;   // row-major [i_lambda * n_x + i_x]
    double exhausted_fraction = 0.0;
    bool reliable = true;  // exhausted_fraction <= 1%

    Verdict at(int i_lambda, int i_x) const {
        return cells[static_cast<size_t>(i_lambda) * spec.n_x + i_x];
    }
};

struct Band {
    double x_lo = 0.0;
    double x_hi = 0.0;
    Verdict verdict = Verdict::Tracked;
    double width() const { return x_hi - x_lo; }
};

struct BandStructure {
    double transect_lambda = 0.0;
    double transect_tau = 0.0;
    std::vector<double> boundaries;  // strictly increasing, refined to 1e-8
    std::vector<Band> bands;         // alternating verdicts

    int count(Verdict v) const {
        int n = 0;
        for (const auto& b : bands)
            if (b.verdict == v) ++n;
        return n;
    }
};

/// Classifies every cell by running the full system from the projected
/// initial condition. Deterministic: static block partition over `workers`
/// threads, disjoint writes, verdicts independent of the partition.
ScanGrid classify_grid(const FlowContext& ctx, const GridSpec& spec,
                       const IntegratorSettings& settings, int workers = 1);

/// Verdict of a single initial condition (x0 on the chosen manifold side at
/// the tau0 determined by lambda0). Used by grid cells and boundary
/// refinement alike so both agree exactly.
Verdict classify_point(const FlowContext& ctx, double x0, double lambda0,
                       ManifoldSide side, const IntegratorSettings& settings);

/// S^r dwell time of a single initial condition (for narrow-band recovery).
double dwell_of_point(const FlowContext& ctx, double x0, double lambda0,
                      ManifoldSide side, const IntegratorSettings& settings);

/// Band boundaries along the transect at fixed lambda. With refine, each
/// verdict flip is bisected with fresh integrations to |dx| <= 1e-8, and
/// tracked bands narrower than one cell are recovered by scanning the S^r
/// dwell time inside each destabilized band and probing around its local
/// maxima.
BandStructure extract_bands(const FlowContext& ctx, const ScanGrid& grid,
                            double transect_lambda, bool refine,
                            const IntegratorSettings& settings);

/// Band extraction directly on a fresh 1-D scan (no precomputed grid).
BandStructure extract_bands_on_transect(const FlowContext& ctx, double transect_lambda,
                                        double x_lo, double x_hi, int n_cells,
                                        ManifoldSide side, bool refine,
                                        const IntegratorSettings& settings,
                                        int workers = 1);

/// Empirical critical rate at delta > 0: bisection on epsilon to width 1e-4,
/// where each probe classifies a coarse grid and asks whether any cell
/// destabilizes. Fills epsilon_c_singular (from the folded-singularity
/// bisection) and the empirical fields.
CriticalRateReport empirical_critical_rate(const SystemDefinition& sys,
                                           const ForcingProfile& forcing_family,
                                           double delta,
                                           std::pair<double, double> eps_bracket,
                                           const GridSpec& spec,
                                           const IntegratorSettings& settings,
                                           int workers = 1);

/// Runs empirical_critical_rate per delta and fits the defect exponent p in
/// E_delta ~ C * delta^p by least squares on log E vs log delta.
std::vector<CriticalRateReport> critical_rate_convergence(
    const SystemDefinition& sys, const ForcingProfile& forcing_family,
    const std::vector<double>& deltas, std::pair<double, double> eps_bracket,
    const GridSpec& spec, const IntegratorSettings& settings, int workers = 1);

}  // namespace fastslow
