#pragma once

#include <string>
#include <vector>

#include "fastslow/desing.hpp"
#include "fastslow/flow.hpp"
#include "fastslow/scan.hpp"

namespace fastslow {

/// Which eigendirection of the folded singularity a singular canard follows.
enum class CanardBranch { SaddleStable, SaddleUnstable, NodeStrong, NodeWeak };

std::string to_string(CanardBranch b);

/// A singular (delta = 0) canard: the desingularized-flow trajectory through
/// a folded singularity along one of its real eigendirections, crossing from
/// the attracting sheet to the repelling one (or back, for the faux branch).
/// Samples are ordered by physical slow time: attracting-side segment first,
/// then the singularity, then the repelling-side segment.
struct SingularCanard {
    FoldedSingularity singularity;
    CanardBranch branch;
    std::vector<TrajectorySample> path;  // t = tau along the physical ordering

    bool is_true_canard() const {
        return branch != CanardBranch::SaddleUnstable;
    }
    /// Linear interpolation of x along the path at slow time tau.
    double x_at_tau(double tau) const;
    double tau_lo() const { return path.front().t; }
    double tau_hi() const { return path.back().t; }
};

enum class MaximalKind { FoldedSaddle, StrongNode, WeakNode, SecondaryNode, Composite };

std::string to_string(MaximalKind k);

/// One shadowed stretch of a composite canard: the template it follows
/// (named by its branch/kind string) and the tau interval of the overlap.
struct CanardSegment {
    std::string label;
    double tau_lo = 0.0;
    double tau_hi = 0.0;
};

/// A maximal canard of the delta > 0 system: the boundary trajectory of the
/// jump dichotomy on a seed section of S^a, i.e. the trajectory staying
/// longest near the repelling slow manifold.
struct MaximalCanard {
    double seed_parameter = 0.0;  // x coordinate on the seed section
    double section_tau = 0.0;
    double section_lambda = 0.0;
    Trajectory path;
    MaximalKind kind = MaximalKind::FoldedSaddle;
    double dwell_s_r = 0.0;
    double seed_tolerance = 0.0;  // final bisection half-width
    std::vector<CanardSegment> segments;  // filled for composite kind
};

struct CanardSettings {
    IntegratorSettings integrator;
    double eta_seed = 1e-6;       // eigendirection seeding offset
    double s_span = 200.0;        // desingularized-time budget per branch
    double section_offset = 1.0;  // tau before tau_star for the seed section
    double section_halfwidth = 0.4;  // x half-width scanned for the dichotomy
    int section_nodes = 81;          // dichotomy pre-scan resolution
    double tube = 0.05;              // shadowing tube eta
};

/// Singular canards of one folded singularity: one per admissible real
/// eigendirection (empty for folded foci and centres). Throws
/// DegeneracyError when a node's eigenvectors are numerically coincident.
std::vector<SingularCanard> singular_canards(const SystemDefinition& sys,
                                             const ForcingProfile& forcing,
                                             const FoldedSingularity& singularity,
                                             const CanardSettings& settings = {});

/// The delta > 0 maximal canard continuing `singular_guess`: bisects the jump
/// dichotomy (escape in +x vs return in -x) over seeds on a section of S^a
/// placed before tau_star, to |dseed| <= 1e-10. Throws SectionError when the
/// section shows no dichotomy.
MaximalCanard maximal_canard(const FlowContext& ctx, const SingularCanard& singular_guess,
                             const CanardSettings& settings = {});

/// Secondary canards read off a transect band structure: every interior band
/// boundary is a jump-dichotomy flip and hence a maximal canard trace. Those
/// that are not the strong/weak primaries' traces and not upper edges of
/// narrow tracked bands (composite candidates, handled by detect_composites)
/// are returned as secondary canards, each with a dwell floor of 0.02 in
/// repelling-manifold time.
std::vector<MaximalCanard> secondary_canards(const FlowContext& ctx,
                                             const BandStructure& bands,
                                             const MaximalCanard& strong,
                                             const MaximalCanard& weak,
                                             const CanardSettings& settings = {});

/// Labels narrow-tracked-band upper boundaries that shadow a folded-node
/// canard (including secondary ones from `canards`) and then the
/// folded-saddle canard within the tube as composite, recording the shadowed
/// segments. Returns one entry per classified boundary; an empty list is
/// valid.
std::vector<MaximalCanard> detect_composites(const FlowContext& ctx,
                                             const BandStructure& bands,
                                             const std::vector<MaximalCanard>& canards,
                                             const std::vector<SingularCanard>& singular,
                                             const CanardSettings& settings = {});

}  // namespace fastslow
