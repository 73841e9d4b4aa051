#include "fastslow/model.hpp"

#include <cmath>

namespace fastslow {

SystemDefinition::SystemDefinition(Poly3 f, Poly3 g, double delta, std::string name)
    : f_(std::move(f)),
      g_(std::move(g)),
      delta_(delta),
      name_(std::move(name)) {
    if (delta_ < 0.0) throw DomainError("SystemDefinition: delta must be >= 0");
    if (f_.degree_x() < 2)
        throw AssumptionError("SystemDefinition '" + name_ +
                              "': f must be at least quadratic in x (A1)");
    if (f_.degree_y() < 1)
        throw AssumptionError("SystemDefinition '" + name_ +
                              "': f must depend on y so S is a graph (A1)");
    fx_ = f_.diff_x();
    fy_ = f_.diff_y();
    flam_ = f_.diff_lambda();
    fxx_ = fx_.diff_x();
    fxy_ = fx_.diff_y();
    fxlam_ = fx_.diff_lambda();
    fyy_ = fy_.diff_y();
    fylam_ = fy_.diff_lambda();
    flamlam_ = flam_.diff_lambda();
    gx_ = g_.diff_x();
    gy_ = g_.diff_y();
    glam_ = g_.diff_lambda();
}

SystemDefinition SystemDefinition::with_delta(double delta) const {
    return SystemDefinition(f_, g_, delta, name_);
}

std::pair<double, double> eval_field(const SystemDefinition& sys, double x, double y,
                                     double lam) {
    return {sys.f_at(x, y, lam), sys.g_at(x, y, lam)};
}

SystemDefinition builtin_system(const std::string& name, double delta) {
    if (name == "paper-example") {
        // f = x(x-1) + y + lambda, g = -x
        Poly3 f{{2, 0, 0, 1.0}, {1, 0, 0, -1.0}, {0, 1, 0, 1.0}, {0, 0, 1, 1.0}};
        Poly3 g{{1, 0, 0, -1.0}};
        return SystemDefinition(std::move(f), std::move(g), delta, name);
    }
    std::string msg = "unknown system '" + name + "'; available:";
    for (const auto& n : builtin_system_names()) msg += " " + n;
    throw LookupError(msg);
}

std::vector<std::string> builtin_system_names() { return {"paper-example"}; }

std::string to_string(ForcingKind kind) {
    switch (kind) {
        case ForcingKind::LogisticTanh: return "logistic-tanh";
        case ForcingKind::ExponentialApproach: return "exponential-approach";
        case ForcingKind::LinearSaturatingRamp: return "linear-saturating-ramp";
        case ForcingKind::Constant: return "constant";
    }
    throw LookupError("unreachable forcing kind");
}

ForcingKind forcing_kind_from_string(const std::string& s) {
    if (s == "logistic-tanh") return ForcingKind::LogisticTanh;
    if (s == "exponential-approach") return ForcingKind::ExponentialApproach;
    if (s == "linear-saturating-ramp") return ForcingKind::LinearSaturatingRamp;
    if (s == "constant") return ForcingKind::Constant;
    throw LookupError("unknown forcing kind '" + s +
                      "'; expected logistic-tanh | exponential-approach | "
                      "linear-saturating-ramp | constant");
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ForcingProfile::ForcingProfile(ForcingKind kind, double lambda_max, double epsilon,
                               double tau_min, double tau_max)
    : kind_(kind),
      lambda_max_(lambda_max),
      epsilon_(epsilon),
      tau_min_(tau_min),
      tau_max_(tau_max) {
    if (!(epsilon_ > 0.0)) throw DomainError("ForcingProfile: epsilon must be > 0");
    if (!(lambda_max_ > 0.0) && kind_ != ForcingKind::Constant)
        throw DomainError("ForcingProfile: lambda_max must be > 0");
    switch (kind_) {
        case ForcingKind::LogisticTanh:
            lambda_min_ = -lambda_max_;
            break;
        case ForcingKind::ExponentialApproach:
        case ForcingKind::LinearSaturatingRamp:
            lambda_min_ = 0.0;
            if (tau_min_ < 0.0) tau_min_ = 0.0;
            break;
        case ForcingKind::Constant:
            lambda_min_ = lambda_max_;
            break;
    }
    if (!(tau_min_ < tau_max_)) throw DomainError("ForcingProfile: empty tau domain");
}

bool ForcingProfile::asymptotically_constant() const {
    switch (kind_) {
        case ForcingKind::LogisticTanh:
        case ForcingKind::ExponentialApproach:
        case ForcingKind::Constant:
            return true;
        case ForcingKind::LinearSaturatingRamp:
            return false;
    }
    return false;
}

ForcingProfile ForcingProfile::with_epsilon(double epsilon) const {
    return ForcingProfile(kind_, lambda_max_, epsilon, tau_min_, tau_max_);
}

void ForcingProfile::check_domain(double tau) const {
    if (!(tau >= tau_min_ && tau <= tau_max_))
        throw DomainError("tau = " + std::to_string(tau) + " outside forcing domain");
}

double ForcingProfile::lambda(double tau) const {
    check_domain(tau);
    switch (kind_) {
        case ForcingKind::LogisticTanh:
            return lambda_max_ * std::tanh(tau);
        case ForcingKind::ExponentialApproach:
            return lambda_max_ * (1.0 - std::exp(-tau));
        case ForcingKind::LinearSaturatingRamp: {
            const double u = std::clamp(tau, 0.0, 1.0);
            return lambda_max_ * u;
        }
        case ForcingKind::Constant:
            return lambda_max_;
    }
    return 0.0;
}

double ForcingProfile::dlambda(double tau) const {
    check_domain(tau);
    switch (kind_) {
        case ForcingKind::LogisticTanh: {
            // d lambda/d tau = (lambda_max^2 - lambda^2) / lambda_max, identically
            const double lam = lambda_max_ * std::tanh(tau);
            return (lambda_max_ * lambda_max_ - lam * lam) / lambda_max_;
        }
        case ForcingKind::ExponentialApproach:
            // d lambda/d tau = lambda_max - lambda, identically
            return lambda_max_ * std::exp(-tau);
        case ForcingKind::LinearSaturatingRamp:
            return (tau > 0.0 && tau < 1.0) ? lambda_max_ : 0.0;
        case ForcingKind::Constant:
            return 0.0;
    }
    return 0.0;
}

double ForcingProfile::d2lambda(double tau) const {
    check_domain(tau);
    switch (kind_) {
        case ForcingKind::LogisticTanh: {
            const double th = std::tanh(tau);
            const double sech2 = 1.0 - th * th;
            return -2.0 * lambda_max_ * th * sech2;
        }
        case ForcingKind::ExponentialApproach:
            return -lambda_max_ * std::exp(-tau);
        case ForcingKind::LinearSaturatingRamp:
        case ForcingKind::Constant:
            return 0.0;
    }
    return 0.0;
}

double ForcingProfile::tau_from_lambda(double lam) const {
    switch (kind_) {
        case ForcingKind::LogisticTanh:
            if (!(lam > lambda_min_ && lam < lambda_max_))
                throw DomainError("lambda outside open forcing range");
            return std::atanh(lam / lambda_max_);
        case ForcingKind::ExponentialApproach:
            if (!(lam >= 0.0 && lam < lambda_max_))
                throw DomainError("lambda outside forcing range");
            return -std::log1p(-lam / lambda_max_);
        case ForcingKind::LinearSaturatingRamp:
            if (!(lam >= 0.0 && lam <= lambda_max_))
                throw DomainError("lambda outside forcing range");
            return lam / lambda_max_;
        case ForcingKind::Constant:
            throw DomainError("constant forcing has no inverse");
    }
    return 0.0;
}

std::pair<double, double> ForcingProfile::scan_window(double slack) const {
    double lo = tau_min_;
    double hi = tau_max_;
    switch (kind_) {
        case ForcingKind::LogisticTanh: {
            // |lambda -+ lambda_max| <= slack at |tau| = atanh(1 - slack/lambda_max)
            const double cut = std::atanh(1.0 - slack / lambda_max_);
            lo = std::max(lo, -cut);
            hi = std::min(hi, cut);
            break;
        }
        case ForcingKind::ExponentialApproach: {
            const double cut = -std::log(slack / lambda_max_);
            lo = std::max(lo, 0.0);
            hi = std::min(hi, cut);
            break;
        }
        case ForcingKind::LinearSaturatingRamp:
            lo = std::max(lo, 0.0);
            hi = std::min(hi, 1.0);
            break;
        case ForcingKind::Constant:
            lo = std::isfinite(lo) ? lo : 0.0;
            hi = std::isfinite(hi) ? hi : 1.0;
            break;
    }
    if (!(lo < hi)) throw DomainError("empty scan window");
    return {lo, hi};
}

std::pair<double, double> eval_forcing(const ForcingProfile& profile, double tau) {
    return {profile.lambda(tau), profile.dlambda(tau)};
}

}  // namespace fastslow
