#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fastslow/model.hpp"

namespace fastslow {

/// Point on the fold curve F: f = 0, df/dx = 0, d2f/dx2 != 0.
struct FoldPoint {
    double x_F = 0.0;
    double y_F = 0.0;
    double lambda = 0.0;
    double second_deriv = 0.0;  // d2f/dx2 at the fold
};

enum class Stability { Attracting, Repelling };

/// One graph segment of the critical manifold at frozen lambda.
struct ManifoldBranch {
    double x_lo = 0.0;
    double x_hi = 0.0;
    Stability stability = Stability::Attracting;
    std::vector<std::pair<double, double>> samples;  // (x, y) with f(x,y,lambda)=0
};

struct CriticalManifoldSlice {
    double lambda = 0.0;
    std::vector<ManifoldBranch> branches;
    std::vector<FoldPoint> folds;
    std::optional<std::pair<double, double>> equilibrium;  // (x~, y~) on S^a
};

/// Tolerances fixed per the double-precision design: 1e-12 root residuals,
/// 1e-6 degeneracy guards.
struct GeometryTolerances {
    double root_residual = 1e-12;
    double degeneracy = 1e-6;
};

/// Solves f(x, y, lambda) = 0 for y at fixed (x, lambda). Degree-1-in-y
/// systems are solved exactly; otherwise Newton from `hint`.
double manifold_y(const SystemDefinition& sys, double x, double lam,
                  std::optional<double> hint = std::nullopt);

/// Solves f(x, y, lambda) = 0 for x at fixed (y, lambda), taking the root
/// nearest `hint`. Used for measuring distance to S along the fast direction.
double manifold_x_near(const SystemDefinition& sys, double y, double lam, double hint);

/// Locates the single quadratic fold at frozen lambda within x_range by a
/// scan of df/dx along S plus Newton refinement. Enforces (A1).
FoldPoint fold_point(const SystemDefinition& sys, double lam,
                     std::pair<double, double> x_range,
                     std::optional<double> x_guess = std::nullopt);

/// Newton refinement of the fold from a nearby guess (used by continuation).
FoldPoint refine_fold(const SystemDefinition& sys, double lam, double x_guess,
                      double y_guess);

/// Fold curve over a lambda range assembled by continuation: predictor from
/// the previous lambda, corrector by Newton.
std::vector<FoldPoint> fold_curve(const SystemDefinition& sys, double lambda_lo,
                                  double lambda_hi, int n_samples,
                                  std::pair<double, double> x_range);

/// The unique stable frozen-system steady state on S^a near the fold (A2).
std::pair<double, double> stable_equilibrium(const SystemDefinition& sys, double lam,
                                             std::pair<double, double> x_range);

/// Samples S(lambda), splits it at folds, labels stability, finds the
/// equilibrium, and hard-gates assumptions (A1)-(A2).
CriticalManifoldSlice slice_manifold(const SystemDefinition& sys, double lam,
                                     std::pair<double, double> x_range, int n_samples);

enum class ManifoldSide { Attracting, Repelling, OnFold };

struct ProjectionOptions {
    bool allow_repelling = false;
    bool allow_on_fold = false;
    std::pair<double, double> x_range{-10.0, 10.0};  // fold search window
};

/// Projects x onto S for the given side: returns (x, y) with |f| <= 1e-12.
/// Throws SideError when x is on the repelling side and the caller did not
/// ask for an S^r projection.
std::pair<double, double> project_onto_s_attracting(const SystemDefinition& sys, double x,
                                                    double lam,
                                                    const ProjectionOptions& opts = {});

/// Which side of the fold x lies on at frozen lambda (based on sign of
/// df/dx on S, oriented so S^a is the attracting side).
ManifoldSide classify_side(const SystemDefinition& sys, double x, double lam);

}  // namespace fastslow
