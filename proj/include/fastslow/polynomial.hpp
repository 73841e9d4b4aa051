#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace fastslow {

/// One monomial c * x^i * y^j * lambda^k.
struct Monomial {
    int i = 0;
    int j = 0;
    int k = 0;
    double c = 0.0;
};

/// Sparse polynomial in (x, y, lambda) with exact coefficient-level
/// differentiation. Vector fields are represented this way so that partial
/// derivatives are never approximated by finite differences.
class Poly3 {
  public:
    Poly3() = default;

    explicit Poly3(std::vector<Monomial> terms) {
        for (const auto& t : terms) {
            if (t.i < 0 || t.j < 0 || t.k < 0)
                throw std::invalid_argument("Poly3: negative exponent");
            if (t.c != 0.0) terms_.push_back(t);
        }
        normalize();
    }

    Poly3(std::initializer_list<Monomial> terms)
        : Poly3(std::vector<Monomial>(terms)) {}

    const std::vector<Monomial>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    double eval(double x, double y, double lam) const {
        double acc = 0.0;
        for (const auto& t : terms_)
            acc += t.c * ipow(x, t.i) * ipow(y, t.j) * ipow(lam, t.k);
        return acc;
    }

    Poly3 diff_x() const { return diff<&Monomial::i>(); }
    Poly3 diff_y() const { return diff<&Monomial::j>(); }
    Poly3 diff_lambda() const { return diff<&Monomial::k>(); }

    int degree_x() const { return degree<&Monomial::i>(); }
    int degree_y() const { return degree<&Monomial::j>(); }
    int degree_lambda() const { return degree<&Monomial::k>(); }

    /// Coefficients of the univariate polynomial in y obtained by fixing
    /// (x, lambda); index = power of y.
    std::vector<double> y_coefficients(double x, double lam) const {
        std::vector<double> c(static_cast<size_t>(degree_y()) + 1, 0.0);
        for (const auto& t : terms_)
            c[static_cast<size_t>(t.j)] += t.c * ipow(x, t.i) * ipow(lam, t.k);
        return c;
    }

    /// Coefficients in x with (y, lambda) fixed.
    std::vector<double> x_coefficients(double y, double lam) const {
        std::vector<double> c(static_cast<size_t>(degree_x()) + 1, 0.0);
        for (const auto& t : terms_)
            c[static_cast<size_t>(t.i)] += t.c * ipow(y, t.j) * ipow(lam, t.k);
        return c;
    }

  private:
    static double ipow(double v, int n) {
        double r = 1.0;
        for (int m = 0; m < n; ++m) r *= v;
        return r;
    }

    template <int Monomial::*Exp>
    Poly3 diff() const {
        Poly3 out;
        for (auto t : terms_) {
            const int e = t.*Exp;
            if (e == 0) continue;
            t.c *= static_cast<double>(e);
            t.*Exp = e - 1;
            out.terms_.push_back(t);
        }
        out.normalize();
        return out;
    }

    template <int Monomial::*Exp>
    int degree() const {
        int d = 0;
        for (const auto& t : terms_) d = std::max(d, t.*Exp);
        return d;
    }

    void normalize() {
        std::sort(terms_.begin(), terms_.end(), [](const Monomial& a, const Monomial& b) {
            if (a.i != b.i) return a.i < b.i;
            if (a.j != b.j) return a.j < b.j;
            return a.k < b.k;
        });
        std::vector<Monomial> merged;
        for (const auto& t : terms_) {
            if (!merged.empty() && merged.back().i == t.i && merged.back().j == t.j &&
                merged.back().k == t.k) {
                merged.back().c += t.c;
            } else {
                merged.push_back(t);
            }
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const Monomial& t) { return t.c == 0.0; }),
                     merged.end());
        terms_ = std::move(merged);
    }

    std::vector<Monomial> terms_;
};

}  // namespace fastslow
