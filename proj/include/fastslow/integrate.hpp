#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "fastslow/errors.hpp"

namespace fastslow {

template <int N>
using Vec = std::array<double, N>;

template <int N>
using Mat = std::array<std::array<double, N>, N>;

struct StepControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = std::numeric_limits<double>::infinity();
    double event_tol = 1e-10;   // bisection tolerance for event times
    int64_t max_steps = 50'000'000;
};

enum class StepperKind { DormandPrince45, Rosenbrock4 };

template <int N>
struct EventSpec {
    std::function<double(double, const Vec<N>&)> fn;
    int direction = 0;  // +1: fires on -..+ crossing, -1: +..-, 0: either
};

template <int N>
struct IntegrationResult {
    std::vector<double> t;
    std::vector<Vec<N>> y;
    int event_index = -1;  // index of the terminating event, -1 if end reached
    double t_end = 0.0;
    Vec<N> y_end{};
    int64_t n_steps = 0;
};

namespace detail {

template <int N>
inline double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1,
                         double rel, double abs) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const double sc = abs + rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = err[i] / sc;
        acc += e * e;
    }
    return std::sqrt(acc / N);
}

// Cubic Hermite interpolant over one accepted step.
template <int N>
inline Vec<N> hermite(double theta, double h, const Vec<N>& y0, const Vec<N>& f0,
                      const Vec<N>& y1, const Vec<N>& f1) {
    Vec<N> out;
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    for (int i = 0; i < N; ++i)
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    return out;
}

// Solve A x = b in place, partial pivoting. N is tiny (2 or 3).
template <int N>
inline void solve_linear(Mat<N> a, Vec<N>& b) {
    for (int col = 0; col < N; ++col) {
        int piv = col;
        for (int r = col + 1; r < N; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) throw StiffnessError("singular stage matrix");
        if (piv != col) {
            std::swap(a[piv], a[col]);
            std::swap(b[piv], b[col]);
        }
        for (int r = col + 1; r < N; ++r) {
            const double m = a[r][col] / a[col][col];
            if (m == 0.0) continue;
            for (int c = col; c < N; ++c) a[r][c] -= m * a[col][c];
            b[r] -= m * b[col];
        }
    }
    for (int col = N - 1; col >= 0; --col) {
        double acc = b[col];
        for (int c = col + 1; c < N; ++c) acc -= a[col][c] * b[c];
        b[col] = acc / a[col][col];
    }
}

template <int N, class RHS>
struct DormandPrince45 {
    static constexpr double kErrExponent = 0.2;
    RHS rhs;
    Vec<N> f0{};  // FSAL
    bool have_f0 = false;

    void prime(double t, const Vec<N>& y) {
        rhs(t, y, f0);
        have_f0 = true;
    }

    // One trial step; returns the scaled error norm. On acceptance the caller
    // commits via `commit` which shifts FSAL state.
    double attempt(double t, const Vec<N>& y, double h, const StepControl& ctrl,
                   Vec<N>& y1, Vec<N>& f1) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        if (!have_f0) prime(t, y);
        Vec<N> k2, k3, k4, k5, k6, ytmp;
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * f0[i];
        rhs(t + c2 * h, ytmp, k2);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * f0[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (int i = 0; i < N; ++i)
            y1[i] = y[i] + h * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                b6 * k6[i]);
        rhs(t + h, y1, f1);
        Vec<N> err;
        for (int i = 0; i < N; ++i)
            err[i] = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * f1[i]);
        return error_norm<N>(err, y, y1, ctrl.rel_tol, ctrl.abs_tol);
    }

    void commit(const Vec<N>& f1) { f0 = f1; }
};

// Kaps-Rentrop 4(3) Rosenbrock method with the Shampine parameter set.
// Requires an analytic Jacobian and time derivative of the right-hand side.
template <int N, class RHS, class JAC>
struct Rosenbrock4 {
    static constexpr double kErrExponent = 0.25;
    RHS rhs;
    JAC jac;
    Vec<N> f0{};
    bool have_f0 = false;

    void prime(double t, const Vec<N>& y) {
        rhs(t, y, f0);
        have_f0 = true;
    }

    double attempt(double t, const Vec<N>& y, double h, const StepControl& ctrl,
                   Vec<N>& y1, Vec<N>& f1) {
        static constexpr double gam = 0.5;
        static constexpr double a21 = 2.0, a31 = 48.0 / 25, a32 = 6.0 / 25;
        static constexpr double c21 = -8.0, c31 = 372.0 / 25, c32 = 12.0 / 5;
        static constexpr double c41 = -112.0 / 125, c42 = -54.0 / 125, c43 = -2.0 / 5;
        static constexpr double b1 = 19.0 / 9, b2 = 1.0 / 2, b3 = 25.0 / 108,
                                b4 = 125.0 / 108;
        static constexpr double e1 = 17.0 / 54, e2 = 7.0 / 36, e3 = 0.0, e4 = 125.0 / 108;
        static constexpr double c1x = 1.0 / 2, c2x = -3.0 / 2, c3x = 121.0 / 50,
                                c4x = 29.0 / 250;
        static constexpr double a2x = 1.0, a3x = 3.0 / 5;

        if (!have_f0) prime(t, y);
        Mat<N> J;
        Vec<N> dfdt;
        jac(t, y, J, dfdt);
        Mat<N> A;
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) A[r][c] = (r == c ? 1.0 / (gam * h) : 0.0) - J[r][c];

        Vec<N> g1, g2, g3, g4, ytmp, ftmp;
        for (int i = 0; i < N; ++i) g1[i] = f0[i] + h * c1x * dfdt[i];
        solve_linear<N>(A, g1);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + a21 * g1[i];
        rhs(t + a2x * h, ytmp, ftmp);
        for (int i = 0; i < N; ++i) g2[i] = ftmp[i] + h * c2x * dfdt[i] + c21 * g1[i] / h;
        solve_linear<N>(A, g2);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + a31 * g1[i] + a32 * g2[i];
        const double t3 = t + a3x * h;
        rhs(t3, ytmp, ftmp);
        for (int i = 0; i < N; ++i)
            g3[i] = ftmp[i] + h * c3x * dfdt[i] + (c31 * g1[i] + c32 * g2[i]) / h;
        solve_linear<N>(A, g3);
        rhs(t3, ytmp, ftmp);  // stage 4 reuses stage-3 arguments
        for (int i = 0; i < N; ++i)
            g4[i] = ftmp[i] + h * c4x * dfdt[i] +
                    (c41 * g1[i] + c42 * g2[i] + c43 * g3[i]) / h;
        solve_linear<N>(A, g4);
        Vec<N> err;
        for (int i = 0; i < N; ++i) {
            y1[i] = y[i] + b1 * g1[i] + b2 * g2[i] + b3 * g3[i] + b4 * g4[i];
            err[i] = e1 * g1[i] + e2 * g2[i] + e3 * g3[i] + e4 * g4[i];
        }
        rhs(t + h, y1, f1);
        return error_norm<N>(err, y, y1, ctrl.rel_tol, ctrl.abs_tol);
    }

    void commit(const Vec<N>& f1) { f0 = f1; }
};

}  // namespace detail

/// Adaptive integration from t0 to t1 (either direction) with terminal event
/// detection. Events are localized on the cubic Hermite interpolant of the
/// accepted step by bisection to ctrl.event_tol, so event times do not depend
/// on how the step controller happened to chop the interval.
///
/// `observer`, when set, is called after every accepted (possibly
/// event-truncated) step. `record` controls whether samples are stored.
template <int N, class RHS, class JAC>
IntegrationResult<N> integrate_with_jacobian(
    StepperKind kind, RHS&& rhs, JAC&& jac, double t0, double t1, Vec<N> y0,
    const StepControl& ctrl, const std::vector<EventSpec<N>>& events = {},
    const std::function<void(double, const Vec<N>&)>& observer = nullptr,
    bool record = true) {
    using RhsT = std::decay_t<RHS>;
    using JacT = std::decay_t<JAC>;
    detail::DormandPrince45<N, RhsT> dp{std::forward<RHS>(rhs)};
    detail::Rosenbrock4<N, RhsT, JacT> rb{dp.rhs, std::forward<JAC>(jac)};

    IntegrationResult<N> res;
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    if (span == 0.0) {
        res.t_end = t0;
        res.y_end = y0;
        if (record) {
            res.t.push_back(t0);
            res.y.push_back(y0);
        }
        return res;
    }

    double t = t0;
    Vec<N> y = y0;
    double h = dir * std::min(ctrl.max_step, span / 100.0);
    std::vector<double> ev_prev(events.size());
    {
        for (size_t e = 0; e < events.size(); ++e) ev_prev[e] = events[e].fn(t, y);
    }
    if (record) {
        res.t.push_back(t);
        res.y.push_back(y);
    }
    if (observer) observer(t, y);

    auto step_attempt = [&](double tt, const Vec<N>& yy, double hh, Vec<N>& y1,
                            Vec<N>& f1) -> double {
        if (kind == StepperKind::Rosenbrock4) return rb.attempt(tt, yy, hh, ctrl, y1, f1);
        return dp.attempt(tt, yy, hh, ctrl, y1, f1);
    };
    auto current_f0 = [&]() -> Vec<N>& {
        return kind == StepperKind::Rosenbrock4 ? rb.f0 : dp.f0;
    };
    auto commit = [&](const Vec<N>& f1) {
        if (kind == StepperKind::Rosenbrock4)
            rb.commit(f1);
        else
            dp.commit(f1);
    };
    if (kind == StepperKind::Rosenbrock4)
        rb.prime(t, y);
    else
        dp.prime(t, y);

    const double err_exp = (kind == StepperKind::Rosenbrock4)
                               ? detail::Rosenbrock4<N, RhsT, JacT>::kErrExponent
                               : detail::DormandPrince45<N, RhsT>::kErrExponent;
    double err_prev = 1.0;
    std::vector<double> ev_next(events.size());

    while (dir * (t1 - t) > 0.0) {
        if (++res.n_steps > ctrl.max_steps)
            throw StiffnessError("step budget exhausted at t = " + std::to_string(t));
        if (dir * (t + h) > dir * t1) h = t1 - t;
        const double hmin = 16.0 * std::numeric_limits<double>::epsilon() *
                            std::max(std::abs(t), 1e-3);
        if (std::abs(h) < hmin)
            throw StiffnessError("step-size underflow at t = " + std::to_string(t));

        Vec<N> y1, f1;
        const double err = step_attempt(t, y, h, y1, f1);
        if (!(err <= 1.0) || !std::isfinite(err)) {
            // reject
            const double fac = std::isfinite(err)
                                   ? std::max(0.2, 0.9 * std::pow(err, -err_exp))
                                   : 0.2;
            h *= std::min(fac, 0.9);
            continue;
        }

        // event check on the accepted interval
        const Vec<N> f0 = current_f0();
        double t_stop = t + h;
        Vec<N> y_stop = y1;
        int fired = -1;
        for (size_t e = 0; e < events.size(); ++e) {
            const double v1 = ev_next[e] = events[e].fn(t + h, y1);
            const double v0 = ev_prev[e];
            const bool crossed = (v0 < 0.0 && v1 >= 0.0 && events[e].direction >= 0) ||
                                 (v0 > 0.0 && v1 <= 0.0 && events[e].direction <= 0);
            if (!crossed) continue;
            // bisection on the Hermite interpolant
            double lo = 0.0, hi = 1.0;
            double vlo = v0;
            while (std::abs(hi - lo) * std::abs(h) > ctrl.event_tol) {
                const double mid = 0.5 * (lo + hi);
                const Vec<N> ym = detail::hermite<N>(mid, h, y, f0, y1, f1);
                const double vm = events[e].fn(t + mid * h, ym);
                if ((vlo < 0.0 && vm >= 0.0) || (vlo > 0.0 && vm <= 0.0))
                    hi = mid;
                else {
                    lo = mid;
                    vlo = vm;
                }
            }
            const double te = t + hi * h;
            if (dir * te <= dir * t_stop) {
                t_stop = te;
                y_stop = detail::hermite<N>(hi, h, y, f0, y1, f1);
                fired = static_cast<int>(e);
            }
        }

        if (fired >= 0) {
            if (record) {
                res.t.push_back(t_stop);
                res.y.push_back(y_stop);
            }
            if (observer) observer(t_stop, y_stop);
            res.event_index = fired;
            res.t_end = t_stop;
            res.y_end = y_stop;
            return res;
        }

        t += h;
        y = y1;
        commit(f1);
        ev_prev = ev_next;
        if (record) {
            res.t.push_back(t);
            res.y.push_back(y);
        }
        if (observer) observer(t, y);

        // PI controller
        const double safe = 0.9;
        double fac = safe * std::pow(std::max(err, 1e-12), -0.7 * err_exp) *
                     std::pow(std::max(err_prev, 1e-12), 0.4 * err_exp);
        fac = std::clamp(fac, 0.2, 6.0);
        err_prev = std::max(err, 1e-12);
        h *= fac;
        if (std::abs(h) > ctrl.max_step) h = dir * ctrl.max_step;
    }
    res.t_end = t;
    res.y_end = y;
    return res;
}

template <int N, class RHS>
IntegrationResult<N> integrate(
    RHS&& rhs, double t0, double t1, Vec<N> y0, const StepControl& ctrl,
    const std::vector<EventSpec<N>>& events = {},
    const std::function<void(double, const Vec<N>&)>& observer = nullptr,
    bool record = true) {
    auto nojac = [](double, const Vec<N>&, Mat<N>&, Vec<N>&) {
        throw StiffnessError("stiff stepper selected but no Jacobian supplied");
    };
    return integrate_with_jacobian<N>(StepperKind::DormandPrince45,
                                      std::forward<RHS>(rhs), nojac, t0, t1, y0, ctrl,
                                      events, observer, record);
}

}  // namespace fastslow
