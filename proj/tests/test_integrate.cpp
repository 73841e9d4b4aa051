#include <doctest.h>

#include <cmath>

#include "fastslow/integrate.hpp"

using namespace fastslow;

TEST_CASE("explicit stepper reproduces exponential decay to tolerance") {
    StepControl ctrl;
    ctrl.rel_tol = 1e-10;
    ctrl.abs_tol = 1e-12;
    auto rhs = [](double, const Vec<1>& y, Vec<1>& dy) { dy[0] = -y[0]; };
    const auto res = integrate<1>(rhs, 0.0, 5.0, Vec<1>{1.0}, ctrl);
    CHECK(res.event_index == -1);
    CHECK(res.t_end == doctest::Approx(5.0));
    CHECK(res.y_end[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-8));
    CHECK(res.t.size() == res.y.size());
    CHECK(res.t.front() == 0.0);
}

TEST_CASE("harmonic oscillator over many periods, forward and backward") {
    StepControl ctrl;
    ctrl.rel_tol = 1e-11;
    ctrl.abs_tol = 1e-13;
    auto rhs = [](double, const Vec<2>& y, Vec<2>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    const double T = 8.0 * std::acos(-1.0);
    const auto fwd = integrate<2>(rhs, 0.0, T, Vec<2>{1.0, 0.0}, ctrl);
    CHECK(fwd.y_end[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(fwd.y_end[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
    const auto bwd = integrate<2>(rhs, 0.0, -T / 16.0, Vec<2>{1.0, 0.0}, ctrl);
    CHECK(bwd.y_end[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
    CHECK(bwd.y_end[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("event time is localized on dense output, not on step endpoints") {
    StepControl ctrl;
    auto rhs = [](double, const Vec<1>& y, Vec<1>& dy) { dy[0] = y[0]; };  // y = e^t
    std::vector<EventSpec<1>> events;
    events.push_back({[](double, const Vec<1>& y) { return y[0] - 2.0; }, +1});
    const auto res = integrate<1>(rhs, 0.0, 10.0, Vec<1>{1.0}, ctrl, events);
    CHECK(res.event_index == 0);
    CHECK(res.t_end == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    CHECK(res.y_end[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("directional events only fire on the requested crossing") {
    StepControl ctrl;
    auto rhs = [](double t, const Vec<1>&, Vec<1>& dy) { dy[0] = std::cos(t); };  // y = sin t
    std::vector<EventSpec<1>> down;
    down.push_back({[](double, const Vec<1>& y) { return y[0] - 0.5; }, -1});
    const auto res = integrate<1>(rhs, 0.0, 7.0, Vec<1>{0.0}, ctrl, down);
    CHECK(res.event_index == 0);
    // first downward crossing of sin t = 0.5 is at pi - pi/6
    CHECK(res.t_end == doctest::Approx(std::acos(-1.0) - std::asin(0.5)).epsilon(1e-7));
}

TEST_CASE("stiff stepper with analytic Jacobian handles a fast relaxation") {
    StepControl ctrl;
    ctrl.rel_tol = 1e-8;
    ctrl.abs_tol = 1e-10;
    const double k = 2000.0;
    auto rhs = [k](double t, const Vec<1>& y, Vec<1>& dy) {
        dy[0] = -k * (y[0] - std::cos(t));
    };
    auto jac = [k](double t, const Vec<1>&, Mat<1>& J, Vec<1>& dfdt) {
        J[0][0] = -k;
        dfdt[0] = -k * std::sin(t);
    };
    const auto res = integrate_with_jacobian<1>(StepperKind::Rosenbrock4, rhs, jac, 0.0,
                                                4.0, Vec<1>{0.0}, ctrl);
    // exact solution settles onto (k^2 cos t + k sin t)/(k^2+1) after the fast layer
    const double t = res.t_end;
    const double exact = (k * k * std::cos(t) + k * std::sin(t)) / (k * k + 1.0) -
                         k * k / (k * k + 1.0) * std::exp(-k * t);
    CHECK(res.y_end[0] == doctest::Approx(exact).epsilon(1e-6));
    CHECK(res.n_steps < 50000);
}

TEST_CASE("step budget exhaustion raises instead of spinning") {
    StepControl ctrl;
    ctrl.max_steps = 10;
    auto rhs = [](double t, const Vec<1>& y, Vec<1>& dy) { dy[0] = std::cos(10.0 * t) * y[0]; };
    CHECK_THROWS_AS(integrate<1>(rhs, 0.0, 1000.0, Vec<1>{1.0}, ctrl), StiffnessError);
}

TEST_CASE("observer sees every accepted step; record=false stores nothing") {
    StepControl ctrl;
    auto rhs = [](double, const Vec<1>& y, Vec<1>& dy) { dy[0] = -y[0]; };
    int calls = 0;
    const auto res = integrate<1>(rhs, 0.0, 1.0, Vec<1>{1.0}, ctrl, {},
                                  [&](double, const Vec<1>&) { ++calls; }, false);
    CHECK(res.t.empty());
    CHECK(res.y.empty());
    CHECK(calls >= 2);  // initial point + at least one step
    CHECK(res.y_end[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("zero-length span returns the initial state") {
    StepControl ctrl;
    auto rhs = [](double, const Vec<1>& y, Vec<1>& dy) { dy[0] = y[0]; };
    const auto res = integrate<1>(rhs, 2.0, 2.0, Vec<1>{3.0}, ctrl);
    CHECK(res.t_end == 2.0);
    CHECK(res.y_end[0] == 3.0);
}
