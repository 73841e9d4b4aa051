#include <doctest.h>

#include <cmath>
#include <random>

#include "fastslow/model.hpp"

using namespace fastslow;

TEST_CASE("built-in system evaluates f = x(x-1)+y+lambda, g = -x") {
    const auto sys = builtin_system("paper-example");
    CHECK(sys.delta() == 0.0);
    CHECK(sys.f_at(0.3, 1.2, -0.5) == doctest::Approx(0.3 * (0.3 - 1) + 1.2 - 0.5));
    CHECK(sys.g_at(0.3, 1.2, -0.5) == -0.3);
    // exact partials
    CHECK(sys.fx(0.3, 1.2, -0.5) == doctest::Approx(2 * 0.3 - 1));
    CHECK(sys.fy(0.3, 1.2, -0.5) == 1.0);
    CHECK(sys.flam(0.3, 1.2, -0.5) == 1.0);
    CHECK(sys.fxx(0.3, 1.2, -0.5) == 2.0);
    CHECK(sys.gx(0.3, 1.2, -0.5) == -1.0);
    CHECK(sys.gy(0.3, 1.2, -0.5) == 0.0);
    const auto fg = eval_field(sys, 0.3, 1.2, -0.5);
    CHECK(fg.first == sys.f_at(0.3, 1.2, -0.5));
    CHECK(fg.second == sys.g_at(0.3, 1.2, -0.5));
}

TEST_CASE("with_delta returns a copy, registry rejects unknown names") {
    const auto sys = builtin_system("paper-example", 0.0);
    const auto sys2 = sys.with_delta(0.01);
    CHECK(sys.delta() == 0.0);
    CHECK(sys2.delta() == 0.01);
    CHECK(sys2.f_at(1.0, 2.0, 3.0) == sys.f_at(1.0, 2.0, 3.0));
    CHECK_THROWS_AS(builtin_system("no-such-system"), LookupError);
    CHECK(!builtin_system_names().empty());
    for (const auto& name : builtin_system_names()) CHECK_NOTHROW(builtin_system(name));
}

TEST_CASE("forcing values and analytic derivatives per kind") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> utau(-3.0, 3.0);
    const double h = 1e-5;
    const std::vector<ForcingProfile> profiles = {
        ForcingProfile(ForcingKind::LogisticTanh, 2.5, 0.2),
        ForcingProfile(ForcingKind::ExponentialApproach, 2.5, 1.0),
        ForcingProfile(ForcingKind::LinearSaturatingRamp, 1.5, 0.3),
    };
    for (const auto& fp : profiles) {
        for (int n = 0; n < 60; ++n) {
            double tau = utau(rng);
            if (tau - h <= fp.tau_min() || tau + h >= fp.tau_max()) continue;
            if (fp.kind() == ForcingKind::LinearSaturatingRamp &&
                (std::abs(tau) < 2 * h || std::abs(tau - 1.0) < 2 * h))
                continue;  // ramp corners
            const double d_num = (fp.lambda(tau + h) - fp.lambda(tau - h)) / (2 * h);
            const double d2_num =
                (fp.dlambda(tau + h) - fp.dlambda(tau - h)) / (2 * h);
            CHECK(fp.dlambda(tau) ==
                  doctest::Approx(d_num).epsilon(1e-6).scale(std::max(1.0, std::abs(d_num))));
            CHECK(fp.d2lambda(tau) ==
                  doctest::Approx(d2_num).epsilon(1e-5).scale(std::max(1.0, std::abs(d2_num))));
            const auto pair = eval_forcing(fp, tau);
            CHECK(pair.first == fp.lambda(tau));
            CHECK(pair.second == fp.dlambda(tau));
        }
    }
}

TEST_CASE("tanh forcing hits its closed form") {
    const ForcingProfile fp(ForcingKind::LogisticTanh, 2.5, 0.216);
    CHECK(fp.lambda(0.0) == 0.0);
    CHECK(fp.lambda(1.3) == doctest::Approx(2.5 * std::tanh(1.3)).epsilon(1e-15));
    CHECK(fp.lambda_min() == doctest::Approx(-2.5));
    CHECK(fp.lambda_max() == 2.5);
}

TEST_CASE("tau_from_lambda inverts lambda on the open range") {
    std::mt19937 rng(7);
    const std::vector<ForcingProfile> profiles = {
        ForcingProfile(ForcingKind::LogisticTanh, 2.5, 0.2),
        ForcingProfile(ForcingKind::ExponentialApproach, 2.0, 0.5),
    };
    for (const auto& fp : profiles) {
        std::uniform_real_distribution<double> ul(fp.lambda_min() + 0.01,
                                                  fp.lambda_max() - 0.01);
        for (int n = 0; n < 40; ++n) {
            const double lam = ul(rng);
            const double tau = fp.tau_from_lambda(lam);
            CHECK(fp.lambda(tau) == doctest::Approx(lam).epsilon(1e-12));
        }
        CHECK_THROWS_AS(fp.tau_from_lambda(fp.lambda_max() + 1.0), DomainError);
    }
    const ForcingProfile c(ForcingKind::Constant, 1.0, 0.1);
    CHECK(c.lambda(-5.0) == 1.0);
    CHECK(c.dlambda(3.0) == 0.0);
    CHECK_THROWS_AS(c.tau_from_lambda(1.0), DomainError);
}

TEST_CASE("domain truncation and scan window") {
    const ForcingProfile fp(ForcingKind::ExponentialApproach, 2.5, 1.0);
    CHECK(fp.tau_min() == 0.0);
    CHECK_THROWS_AS(fp.lambda(-0.5), DomainError);
    const auto [lo, hi] = fp.scan_window();
    CHECK(lo == fp.tau_min());
    CHECK(std::isfinite(hi));
    CHECK(std::abs(fp.lambda(hi) - fp.lambda_max()) <= 2e-9);

    const ForcingProfile tr(ForcingKind::LogisticTanh, 2.5, 0.2, -4.0, 4.0);
    CHECK_THROWS_AS(tr.lambda(4.5), DomainError);
    const auto w = tr.scan_window();
    CHECK(w.first >= -4.0);
    CHECK(w.second <= 4.0);
}

TEST_CASE("with_epsilon keeps the shape, kind round-trips through strings") {
    const ForcingProfile fp(ForcingKind::LogisticTanh, 2.5, 0.2);
    const auto fp2 = fp.with_epsilon(0.3);
    CHECK(fp2.epsilon() == 0.3);
    CHECK(fp2.lambda(0.7) == fp.lambda(0.7));
    for (auto k : {ForcingKind::LogisticTanh, ForcingKind::ExponentialApproach,
                   ForcingKind::LinearSaturatingRamp, ForcingKind::Constant})
        CHECK(forcing_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(forcing_kind_from_string("sinusoid"), LookupError);
    CHECK(fp.asymptotically_constant());
}
