#include <doctest.h>

#include <cmath>

#include "fastslow/scan.hpp"

using namespace fastslow;

namespace {

const double kLambdaMax = 2.5;

IntegratorSettings fast_settings() {
    IntegratorSettings is;
    is.rel_tol = 1e-8;
    is.abs_tol = 1e-10;
    return is;
}

}  // namespace

TEST_CASE("sub-critical grid is fully tracked and worker-count invariant") {
    const auto sys = builtin_system("paper-example", 0.01);
    const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.06);
    const FlowContext ctx(sys, fp);
    GridSpec spec;
    spec.n_x = 10;
    spec.n_lambda = 10;
    spec.x_lo = -1.5;
    spec.x_hi = 0.45;
    spec.lambda_lo = -2.3;
    spec.lambda_hi = 2.3;
    const auto is = fast_settings();
    const auto grid = classify_grid(ctx, spec, is, 1);
    CHECK(grid.lambdas.size() == 10);
    CHECK(grid.xs.size() == 10);
    REQUIRE(grid.cells.size() == 100);
    for (const auto v : grid.cells) CHECK(v == Verdict::Tracked);
    CHECK(grid.exhausted_fraction == 0.0);
    CHECK(grid.reliable);
    CHECK(grid.at(3, 7) == grid.cells[3 * 10 + 7]);

    const auto grid3 = classify_grid(ctx, spec, is, 3);
    CHECK(grid3.cells == grid.cells);
    CHECK(grid3.lambdas == grid.lambdas);
    CHECK(grid3.xs == grid.xs);
}

TEST_CASE("grid cells agree with single-point classification") {
    const auto sys = builtin_system("paper-example", 0.01);
    const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.216);
    const FlowContext ctx(sys, fp);
    GridSpec spec;
    spec.n_x = 6;
    spec.n_lambda = 6;
    spec.x_lo = -1.2;
    spec.x_hi = 0.4;
    spec.lambda_lo = -1.8;
    spec.lambda_hi = 1.8;
    const auto is = fast_settings();
    const auto grid = classify_grid(ctx, spec, is, 2);
    int n_destab = 0;
    for (int il = 0; il < 6; ++il)
        for (int ix = 0; ix < 6; ++ix) {
            const Verdict v =
                classify_point(ctx, grid.xs[ix], grid.lambdas[il], spec.side, is);
            CHECK(v == grid.at(il, ix));
            if (v == Verdict::Destabilized) ++n_destab;
        }
    CHECK(n_destab > 0);  // above the critical rate some cells must escape
    CHECK(n_destab < 36);
}

TEST_CASE("simple threshold transect: one boundary pair, alternating bands") {
    const auto sys = builtin_system("paper-example", 0.01);
    const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.201);
    const FlowContext ctx(sys, fp);
    const auto is = fast_settings();
    const auto bands =
        extract_bands_on_transect(ctx, -0.7, -1.5, 0.45, 200, ManifoldSide::Attracting,
                                  true, is, 1);
    CHECK(bands.transect_lambda == -0.7);
    CHECK(bands.transect_tau ==
          doctest::Approx(fp.tau_from_lambda(-0.7)).epsilon(1e-12));
    REQUIRE(bands.boundaries.size() == 2);
    REQUIRE(bands.bands.size() == 3);
    CHECK(bands.count(Verdict::Destabilized) == 1);
    CHECK(bands.count(Verdict::Tracked) == 2);
    CHECK(bands.bands.front().x_lo == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(bands.bands.back().x_hi == doctest::Approx(0.45).epsilon(1e-12));
    for (size_t i = 0; i + 1 < bands.bands.size(); ++i) {
        CHECK(bands.bands[i].x_hi == doctest::Approx(bands.bands[i + 1].x_lo));
        CHECK(bands.bands[i].verdict != bands.bands[i + 1].verdict);
    }
    CHECK(std::is_sorted(bands.boundaries.begin(), bands.boundaries.end()));
    // each refined boundary separates opposite verdicts at 1e-6 resolution
    for (const double b : bands.boundaries) {
        const Verdict lo = classify_point(ctx, b - 1e-6, -0.7, ManifoldSide::Attracting, is);
        const Verdict hi = classify_point(ctx, b + 1e-6, -0.7, ManifoldSide::Attracting, is);
        CHECK(lo != hi);
    }
}

TEST_CASE("band extraction from a precomputed grid matches the fresh scan") {
    const auto sys = builtin_system("paper-example", 0.01);
    const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.201);
    const FlowContext ctx(sys, fp);
    const auto is = fast_settings();
    GridSpec spec;
    spec.n_x = 80;
    spec.n_lambda = 1;
    spec.x_lo = -1.5;
    spec.x_hi = 0.45;
    spec.lambda_lo = -0.7;
    spec.lambda_hi = -0.7;
    const auto grid = classify_grid(ctx, spec, is, 1);
    const auto from_grid = extract_bands(ctx, grid, -0.7, true, is);
    const auto fresh = extract_bands_on_transect(ctx, -0.7, -1.5, 0.45, 80,
                                                 ManifoldSide::Attracting, true, is, 1);
    REQUIRE(from_grid.boundaries.size() == fresh.boundaries.size());
    for (size_t i = 0; i < fresh.boundaries.size(); ++i)
        CHECK(from_grid.boundaries[i] == doctest::Approx(fresh.boundaries[i]).epsilon(1e-7));
}

TEST_CASE("canard boundaries maximize the dwell near the repelling manifold") {
    const auto sys = builtin_system("paper-example", 0.01);
    const ForcingProfile fp(ForcingKind::LogisticTanh, kLambdaMax, 0.201);
    const FlowContext ctx(sys, fp);
    const auto is = fast_settings();
    const auto bands =
        extract_bands_on_transect(ctx, -0.7, -1.5, 0.45, 200, ManifoldSide::Attracting,
                                  true, is, 1);
    REQUIRE(bands.boundaries.size() == 2);
    const double b0 = bands.boundaries.front();
    const double center = 0.5 * (bands.boundaries[0] + bands.boundaries[1]);
    const double d_near =
        dwell_of_point(ctx, b0 + 1e-7, -0.7, ManifoldSide::Attracting, is);
    const double d_mid = dwell_of_point(ctx, center, -0.7, ManifoldSide::Attracting, is);
    CHECK(d_near > d_mid);
    CHECK(d_near > 0.02);
}

TEST_CASE("empirical critical rate brackets the singular one from below") {
    const auto sys = builtin_system("paper-example", 0.01);
    const ForcingProfile family(ForcingKind::LogisticTanh, kLambdaMax, 1.0);
    GridSpec spec;
    spec.n_x = 8;
    spec.n_lambda = 8;
    spec.x_lo = -1.5;
    spec.x_hi = 0.45;
    spec.lambda_lo = -2.3;
    spec.lambda_hi = 2.3;
    const auto is = fast_settings();
    const auto report =
        empirical_critical_rate(sys, family, 0.01, {0.15, 0.25}, spec, is, 2);
    CHECK(report.epsilon_c_singular == doctest::Approx(0.2).epsilon(1e-6));
    REQUIRE(report.epsilon_c_empirical.has_value());
    CHECK(*report.epsilon_c_empirical > 0.15);
    CHECK(*report.epsilon_c_empirical < 0.25);
    CHECK(std::abs(*report.epsilon_c_empirical - 0.2) < 0.05);
    REQUIRE(report.E_delta.has_value());
    CHECK(*report.E_delta ==
          doctest::Approx(std::abs(*report.epsilon_c_empirical -
                                   report.epsilon_c_singular))
              .epsilon(1e-12));
}
