#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "fastslow/desing.hpp"
#include "fastslow/geometry.hpp"
#include "fastslow/model.hpp"

namespace fastslow {

enum class Verdict { Tracked, Destabilized, Exhausted, HitFold };

std::string to_string(Verdict v);

struct TrajectorySample {
    double t = 0.0;  // slow time tau
    double x = 0.0;
    double y = 0.0;
    double lambda = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    Verdict verdict = Verdict::Exhausted;
    double verdict_time = 0.0;            // tau (or s) of the deciding event
    double final_distance = 0.0;          // |x - x~(lambda)| at the end
    double dwell_s_r = 0.0;               // slow time spent near S^r past the fold
};

struct IntegratorSettings {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = std::numeric_limits<double>::infinity();
    double escape_offset = 1.5;    // Delta_esc beyond the fold (E1)
    double tracking_tube = 0.05;   // rho_track around x~ (E2)
    std::optional<double> horizon;  // tau_end; default: |dlambda/dtau| <= 1e-6
    double horizon_slack = 5.0;     // extra tau past the horizon before E3
    bool stiff = false;             // select the implicit stepper
    double dwell_tube = 0.05;       // eta for S^r dwell accounting
    bool track_dwell = false;       // dwell accounting costs a root solve per step
    bool record_samples = true;
    int64_t max_steps = 20'000'000;
};

/// Precomputed, immutable per-(system, forcing) data shared by all
/// trajectories of a scan: the fold curve and moving stable state as
/// lambda-tables with stateless Newton refinement, the folded singularities,
/// and the default horizon. Safe to share read-only across workers.
class FlowContext {
  public:
    FlowContext(const SystemDefinition& sys, const ForcingProfile& forcing,
                std::pair<double, double> x_range = {-10.0, 10.0});

    const SystemDefinition& sys() const { return sys_; }
    const ForcingProfile& forcing() const { return forcing_; }

    /// Fold location at frozen lambda (table lookup + Newton correction).
    FoldPoint fold_at(double lam) const;
    /// Moving stable state x~(lambda) (table lookup + Newton correction).
    std::pair<double, double> equilibrium_at(double lam) const;

    const std::vector<FoldedSingularity>& singularities() const { return singularities_; }
    /// tau of the last folded singularity; horizon when none exist.
    double quiet_time() const { return quiet_time_; }
    double default_horizon() const { return horizon_; }
    std::pair<double, double> x_range() const { return x_range_; }

  private:
    SystemDefinition sys_;
    ForcingProfile forcing_;
    std::pair<double, double> x_range_;
    std::vector<FoldedSingularity> singularities_;
    double quiet_time_ = 0.0;
    double horizon_ = 0.0;
    double lam_lo_ = 0.0, lam_hi_ = 0.0;
    std::vector<FoldPoint> fold_table_;
    std::vector<std::pair<double, double>> equil_table_;
};

/// Full 3D nonautonomous system in slow time tau (Eqs. of motion
/// delta*eps*dx/dtau = f, eps*dy/dtau = g), with event detection:
///   E1 destabilized: x crosses x_F(lambda) + Delta_esc going up,
///   E2 tracked: past the last folded singularity (or past the horizon when
///      there is none), |x - x~| <= rho_track with df/dx < 0,
///   E3 exhausted: slow time runs out.
Trajectory integrate_full(const FlowContext& ctx, double x0, double y0, double tau0,
                          const IntegratorSettings& settings);
Trajectory integrate_full(const SystemDefinition& sys, const ForcingProfile& forcing,
                          double x0, double y0, double tau0,
                          const IntegratorSettings& settings);

/// Projected reduced flow dx/dtau on S; verdict HitFold when the trajectory
/// reaches the fold (divergence of dx/dtau).
Trajectory integrate_reduced(const FlowContext& ctx, double x0, double tau0,
                             const IntegratorSettings& settings);
Trajectory integrate_reduced(const SystemDefinition& sys, const ForcingProfile& forcing,
                             double x0, double tau0, const IntegratorSettings& settings);

/// Desingularized flow in rescaled time s over [0, s_span] (s_span may be
/// negative for backward tracing). Stops early when tau leaves the forcing
/// window or |x| exceeds a guard. Samples carry t = tau (the physical slow
/// time reached at each rescaled-time step); verdict_time carries the final s.
Trajectory integrate_desing(const SystemDefinition& sys, const ForcingProfile& forcing,
                            double x0, double tau0, double s_span,
                            const IntegratorSettings& settings);

/// Distance from (x, y) to the critical manifold along the fast direction.
double distance_to_manifold(const SystemDefinition& sys, double x, double y, double lam);

}  // namespace fastslow
