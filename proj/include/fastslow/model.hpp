#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fastslow/errors.hpp"
#include "fastslow/polynomial.hpp"

namespace fastslow {

/// A forced one-fast/one-slow system
///
///   delta * dx/dt = f(x, y, lambda(eps*t))
///           dy/dt = g(x, y, lambda(eps*t))
///
/// with polynomial f, g. The fast timescale is T = t/delta. Partial
/// derivatives are exact coefficient manipulations of the polynomials.
/// Immutable after construction; safe to share across workers.
class SystemDefinition {
  public:
    SystemDefinition(Poly3 f, Poly3 g, double delta, std::string name);

    const Poly3& f() const { return f_; }
    const Poly3& g() const { return g_; }
    double delta() const { return delta_; }
    const std::string& name() const { return name_; }

    /// Returns a copy with a different timescale ratio.
    SystemDefinition with_delta(double delta) const;

    double f_at(double x, double y, double lam) const { return f_.eval(x, y, lam); }
    double g_at(double x, double y, double lam) const { return g_.eval(x, y, lam); }

    double fx(double x, double y, double lam) const { return fx_.eval(x, y, lam); }
    double fy(double x, double y, double lam) const { return fy_.eval(x, y, lam); }
    double flam(double x, double y, double lam) const { return flam_.eval(x, y, lam); }
    double fxx(double x, double y, double lam) const { return fxx_.eval(x, y, lam); }
    double fxy(double x, double y, double lam) const { return fxy_.eval(x, y, lam); }
    double fxlam(double x, double y, double lam) const { return fxlam_.eval(x, y, lam); }
    double fyy(double x, double y, double lam) const { return fyy_.eval(x, y, lam); }
    double fylam(double x, double y, double lam) const { return fylam_.eval(x, y, lam); }
    double flamlam(double x, double y, double lam) const { return flamlam_.eval(x, y, lam); }
    double gx(double x, double y, double lam) const { return gx_.eval(x, y, lam); }
    double gy(double x, double y, double lam) const { return gy_.eval(x, y, lam); }
    double glam(double x, double y, double lam) const { return glam_.eval(x, y, lam); }

  private:
    Poly3 f_, g_;
    Poly3 fx_, fy_, flam_, fxx_, fxy_, fxlam_, fyy_, fylam_, flamlam_;
    Poly3 gx_, gy_, glam_;
    double delta_;
    std::string name_;
};

/// Evaluates (f, g) at a point with the forcing value frozen.
std::pair<double, double> eval_field(const SystemDefinition& sys, double x, double y,
                                     double lam);

/// Built-in systems. "paper-example" is f = x(x-1) + y + lambda, g = -x.
SystemDefinition builtin_system(const std::string& name, double delta = 0.0);
std::vector<std::string> builtin_system_names();

enum class ForcingKind { LogisticTanh, ExponentialApproach, LinearSaturatingRamp, Constant };

std::string to_string(ForcingKind kind);
ForcingKind forcing_kind_from_string(const std::string& s);

/// A smooth monotone external input lambda(tau) on the slow time tau = eps*t,
/// with analytic first and second derivatives and an analytic inverse.
///
/// Kinds:
///   logistic-tanh:          lambda = lambda_max * tanh(tau),  tau in (-inf, inf)
///   exponential-approach:   lambda = lambda_max * (1 - e^-tau),  tau in (0, inf)
///   linear-saturating-ramp: lambda = lambda_max * clamp(tau, 0, 1)
///   constant:               lambda = lambda_max for all tau
class ForcingProfile {
  public:
    ForcingProfile(ForcingKind kind, double lambda_max, double epsilon,
                   double tau_min = -std::numeric_limits<double>::infinity(),
                   double tau_max = std::numeric_limits<double>::infinity());

    ForcingKind kind() const { return kind_; }
    double lambda_max() const { return lambda_max_; }
    double lambda_min() const { return lambda_min_; }
    double epsilon() const { return epsilon_; }
    double tau_min() const { return tau_min_; }
    double tau_max() const { return tau_max_; }
    bool asymptotically_constant() const;

    ForcingProfile with_epsilon(double epsilon) const;

    /// lambda(tau); throws DomainError outside [tau_min, tau_max].
    double lambda(double tau) const;
    /// Analytic d lambda / d tau.
    double dlambda(double tau) const;
    /// Analytic d^2 lambda / d tau^2.
    double d2lambda(double tau) const;

    /// Analytic inverse tau(lambda); throws DomainError when lambda is not
    /// attained in the open range or the profile is constant.
    double tau_from_lambda(double lam) const;

    /// Finite [lo, hi] window covering every tau where the forcing is still
    /// moving: infinite endpoints are truncated where
    /// |lambda(tau) - asymptote| <= slack.
    std::pair<double, double> scan_window(double slack = 1e-9) const;

  private:
    void check_domain(double tau) const;

    ForcingKind kind_;
    double lambda_max_;
    double lambda_min_;
    double epsilon_;
    double tau_min_;
    double tau_max_;
};

/// Returns (lambda, dlambda/dtau) at tau.
std::pair<double, double> eval_forcing(const ForcingProfile& profile, double tau);

}  // namespace fastslow
