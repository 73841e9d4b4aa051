#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fastslow/errors.hpp"

namespace fastslow {

/// Bisection on a bracketing interval [a, b] with fn(a)*fn(b) <= 0.
/// Converges to |b - a| <= xtol and returns the midpoint.
inline double bisect(const std::function<double(double)>& fn, double a, double b,
                     double xtol) {
    double fa = fn(a);
    double fb = fn(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw BracketError("bisect: endpoints do not bracket a root");
    while (b - a > xtol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;  // hit double-precision resolution
        const double fm = fn(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

/// Newton iteration with bisection safeguarding inside [lo, hi].
inline double newton_safe(const std::function<double(double)>& fn,
                          const std::function<double(double)>& dfn, double x0, double lo,
                          double hi, double xtol, int max_iter = 100) {
    double x = x0;
    for (int it = 0; it < max_iter; ++it) {
        const double f = fn(x);
        const double d = dfn(x);
        double step = (d != 0.0) ? -f / d : (hi - lo);
        double xn = x + step;
        if (!(xn > lo && xn < hi) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= xtol) return xn;
        // keep a valid bracket when we have one
        if (fn(lo) * f < 0.0)
            hi = x;
        else if (fn(hi) * f < 0.0)
            lo = x;
        x = xn;
    }
    return x;
}

/// Refines a local extremum of fn inside [a, b] by golden-section search on
/// the appropriate sign. `maximize` selects which extremum.
inline double refine_extremum(const std::function<double(double)>& fn, double a, double b,
                              bool maximize, double xtol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = fn(x1);
    double f2 = fn(x2);
    while (b - a > xtol) {
        const bool pick_left = maximize ? (f1 > f2) : (f1 < f2);
        if (pick_left) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = fn(x2);
        }
        if (x1 >= x2) break;
    }
    return 0.5 * (a + b);
}

/// All roots of a smooth scalar function on [a, b], located by a dense node
/// scan. Plain sign changes are bisected; near-tangent root pairs hiding
/// between nodes are recovered by refining every interior extremum and
/// splitting its bracket when the extremal value crosses zero. A refined
/// extremum whose |value| <= touch_tol counts as one (double) root.
struct ScanRoot {
    double x;
    bool is_double_root;
};

inline std::vector<ScanRoot> find_roots_scanned(const std::function<double(double)>& fn,
                                                double a, double b, int n_nodes,
                                                double xtol, double touch_tol) {
    std::vector<ScanRoot> roots;
    if (n_nodes < 3) n_nodes = 3;
    std::vector<double> xs(static_cast<size_t>(n_nodes));
    std::vector<double> fs(static_cast<size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
        xs[static_cast<size_t>(i)] = a + (b - a) * i / (n_nodes - 1);
        fs[static_cast<size_t>(i)] = fn(xs[static_cast<size_t>(i)]);
    }
    auto push = [&](double x, bool dbl) {
        for (const auto& r : roots)
            if (std::abs(r.x - x) <= 16.0 * xtol + 1e-12 * std::abs(x)) return;
        roots.push_back({x, dbl});
    };
    for (int i = 0; i + 1 < n_nodes; ++i) {
        const double f0 = fs[static_cast<size_t>(i)];
        const double f1 = fs[static_cast<size_t>(i + 1)];
        if (f0 == 0.0) push(xs[static_cast<size_t>(i)], false);
        if (f0 * f1 < 0.0)
            push(bisect(fn, xs[static_cast<size_t>(i)], xs[static_cast<size_t>(i + 1)], xtol),
                 false);
    }
    if (fs.back() == 0.0) push(xs.back(), false);
    // interior extrema that may conceal a tangency or a close root pair
    for (int i = 1; i + 1 < n_nodes; ++i) {
        const double fm = fs[static_cast<size_t>(i)];
        const double fl = fs[static_cast<size_t>(i - 1)];
        const double fr = fs[static_cast<size_t>(i + 1)];
        const bool local_max = fm >= fl && fm >= fr;
        const bool local_min = fm <= fl && fm <= fr;
        if (!local_max && !local_min) continue;
        // only interesting when the extremum opposes the surrounding sign
        if (local_max && fm > 0.0) continue;
        if (local_min && fm < 0.0) continue;
        const double lo = xs[static_cast<size_t>(i - 1)];
        const double hi = xs[static_cast<size_t>(i + 1)];
        const double xe = refine_extremum(fn, lo, hi, local_max, xtol);
        const double fe = fn(xe);
        if ((local_max && fe > 0.0) || (local_min && fe < 0.0)) {
            // the extremum pokes through zero: two roots bracket it
            if (fn(lo) * fe < 0.0) push(bisect(fn, lo, xe, xtol), false);
            if (fe * fn(hi) < 0.0) push(bisect(fn, xe, hi, xtol), false);
        } else if (std::abs(fe) <= touch_tol) {
            push(xe, true);
        }
    }
    std::sort(roots.begin(), roots.end(),
              [](const ScanRoot& p, const ScanRoot& q) { return p.x < q.x; });
    return roots;
}

}  // namespace fastslow
