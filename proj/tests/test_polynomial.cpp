#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fastslow/polynomial.hpp"

using namespace fastslow;

namespace {

// f = x(x-1) + y + lambda
const Poly3 kFold{{2, 0, 0, 1.0}, {1, 0, 0, -1.0}, {0, 1, 0, 1.0}, {0, 0, 1, 1.0}};

double central(const Poly3& p, double x, double y, double lam, int which) {
    const double h = 1e-5;
    const double xp = which == 0 ? h : 0.0;
    const double yp = which == 1 ? h : 0.0;
    const double lp = which == 2 ? h : 0.0;
    return (p.eval(x + xp, y + yp, lam + lp) - p.eval(x - xp, y - yp, lam - lp)) /
           (2.0 * h);
}

}  // namespace

TEST_CASE("evaluation matches the closed form") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int n = 0; n < 50; ++n) {
        const double x = u(rng), y = u(rng), lam = u(rng);
        CHECK(kFold.eval(x, y, lam) == doctest::Approx(x * (x - 1) + y + lam).epsilon(1e-14));
    }
}

TEST_CASE("coefficient-level derivatives agree with central differences") {
    const Poly3 p{{3, 1, 0, 2.0}, {1, 2, 1, -0.7}, {0, 0, 2, 1.3}, {2, 0, 0, 0.5}};
    const Poly3 dx = p.diff_x(), dy = p.diff_y(), dl = p.diff_lambda();
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 0; n < 40; ++n) {
        const double x = u(rng), y = u(rng), lam = u(rng);
        CHECK(dx.eval(x, y, lam) == doctest::Approx(central(p, x, y, lam, 0)).epsilon(1e-6));
        CHECK(dy.eval(x, y, lam) == doctest::Approx(central(p, x, y, lam, 1)).epsilon(1e-6));
        CHECK(dl.eval(x, y, lam) == doctest::Approx(central(p, x, y, lam, 2)).epsilon(1e-6));
    }
}

TEST_CASE("derivatives are exact, not approximate") {
    // d/dx [x^2 - x] = 2x - 1 exactly, bit for bit
    const Poly3 dx = kFold.diff_x();
    CHECK(dx.eval(0.5, 7.0, -3.0) == 0.0);
    CHECK(dx.eval(2.0, 0.0, 0.0) == 3.0);
    const Poly3 dxx = dx.diff_x();
    CHECK(dxx.eval(123.0, -5.0, 9.0) == 2.0);
    CHECK(dxx.diff_x().empty());
}

TEST_CASE("normalization merges duplicates and drops zeros") {
    const Poly3 p{{1, 0, 0, 2.0}, {1, 0, 0, 3.0}, {0, 1, 0, 1.0}, {0, 1, 0, -1.0}};
    CHECK(p.terms().size() == 1);
    CHECK(p.terms()[0].c == 5.0);
    CHECK(p.eval(2.0, 100.0, 0.0) == 10.0);
}

TEST_CASE("negative exponents are rejected") {
    CHECK_THROWS_AS(Poly3({{-1, 0, 0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Poly3({{0, 0, -2, 1.0}}), std::invalid_argument);
}

TEST_CASE("degrees") {
    const Poly3 p{{3, 1, 0, 2.0}, {1, 2, 1, -0.7}};
    CHECK(p.degree_x() == 3);
    CHECK(p.degree_y() == 2);
    CHECK(p.degree_lambda() == 1);
    CHECK(Poly3{}.degree_x() == 0);
}

TEST_CASE("univariate coefficient extraction reconstructs the evaluation") {
    const Poly3 p{{2, 0, 0, 1.0}, {1, 1, 0, -2.0}, {0, 2, 1, 0.5}, {0, 0, 0, 3.0}};
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 0; n < 20; ++n) {
        const double x = u(rng), y = u(rng), lam = u(rng);
        double acc = 0.0, pw = 1.0;
        for (double c : p.y_coefficients(x, lam)) {
            acc += c * pw;
            pw *= y;
        }
        CHECK(acc == doctest::Approx(p.eval(x, y, lam)).epsilon(1e-13));
        acc = 0.0;
        pw = 1.0;
        for (double c : p.x_coefficients(y, lam)) {
            acc += c * pw;
            pw *= x;
        }
        CHECK(acc == doctest::Approx(p.eval(x, y, lam)).epsilon(1e-13));
    }
}
