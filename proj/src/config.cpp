#include "fastslow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fastslow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(path + "/" + key, "unknown key");
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "/" + key, "missing required number");
    }
    if (!obj[key].is_number()) fail(path + "/" + key, "expected a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key,
            std::optional<int> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "/" + key, "missing required integer");
    }
    if (!obj[key].is_number_integer()) fail(path + "/" + key, "expected an integer");
    return obj[key].get<int>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "/" + key, "missing required string");
    }
    if (!obj[key].is_string()) fail(path + "/" + key, "expected a string");
    return obj[key].get<std::string>();
}

Poly3 parse_poly(const json& arr, const std::string& path) {
    if (!arr.is_array()) fail(path, "expected an array of [i, j, k, c] quadruples");
    std::vector<Monomial> terms;
    for (size_t n = 0; n < arr.size(); ++n) {
        const auto& q = arr[n];
        const std::string qp = path + "/" + std::to_string(n);
        if (!q.is_array() || q.size() != 4) fail(qp, "expected [i, j, k, c]");
        for (int m = 0; m < 3; ++m)
            if (!q[m].is_number_integer() || q[m].get<int>() < 0)
                fail(qp, "exponents must be non-negative integers");
        if (!q[3].is_number()) fail(qp, "coefficient must be a number");
        terms.push_back({q[0].get<int>(), q[1].get<int>(), q[2].get<int>(),
                         q[3].get<double>()});
    }
    return Poly3(std::move(terms));
}

SystemDefinition parse_system(const json& j) {
    if (!j.contains("system")) fail("/system", "missing required object");
    const auto& s = j["system"];
    if (!s.is_object()) fail("/system", "expected an object");
    reject_unknown(s, "/system", {"name", "f_coeffs", "g_coeffs", "delta"});
    const double delta = get_number(s, "/system", "delta", 0.0);
    if (delta < 0.0) fail("/system/delta", "must be >= 0");
    if (s.contains("name")) {
        if (s.contains("f_coeffs") || s.contains("g_coeffs"))
            fail("/system", "give either name or f_coeffs/g_coeffs, not both");
        try {
            return builtin_system(get_string(s, "/system", "name"), delta);
        } catch (const std::exception& e) {
            fail("/system/name", e.what());
        }
    }
    if (!s.contains("f_coeffs") || !s.contains("g_coeffs"))
        fail("/system", "needs name or both f_coeffs and g_coeffs");
    try {
        return SystemDefinition(parse_poly(s["f_coeffs"], "/system/f_coeffs"),
                                parse_poly(s["g_coeffs"], "/system/g_coeffs"), delta,
                                "custom");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail("/system", e.what());
    }
}

ForcingProfile parse_forcing(const json& j) {
    if (!j.contains("forcing")) fail("/forcing", "missing required object");
    const auto& f = j["forcing"];
    if (!f.is_object()) fail("/forcing", "expected an object");
    reject_unknown(f, "/forcing", {"kind", "lambda_max", "epsilon", "tau_min", "tau_max"});
    ForcingKind kind;
    try {
        kind = forcing_kind_from_string(get_string(f, "/forcing", "kind"));
    } catch (const std::exception& e) {
        fail("/forcing/kind", e.what());
    }
    const double lambda_max = get_number(f, "/forcing", "lambda_max");
    const double epsilon = get_number(f, "/forcing", "epsilon");
    if (!(epsilon > 0.0)) fail("/forcing/epsilon", "must be > 0");
    const double inf = std::numeric_limits<double>::infinity();
    const double tau_min = get_number(f, "/forcing", "tau_min", -inf);
    const double tau_max = get_number(f, "/forcing", "tau_max", inf);
    try {
        return ForcingProfile(kind, lambda_max, epsilon, tau_min, tau_max);
    } catch (const std::exception& e) {
        fail("/forcing", e.what());
    }
}

IntegratorSettings parse_integrator(const json& j) {
    IntegratorSettings s;
    if (!j.contains("integrator")) return s;
    const auto& i = j["integrator"];
    if (!i.is_object()) fail("/integrator", "expected an object");
    reject_unknown(i, "/integrator",
                   {"rel_tol", "abs_tol", "max_step", "escape_offset", "tracking_tube",
                    "horizon", "horizon_slack", "stiff", "dwell_tube"});
    s.rel_tol = get_number(i, "/integrator", "rel_tol", s.rel_tol);
    s.abs_tol = get_number(i, "/integrator", "abs_tol", s.abs_tol);
    s.max_step = get_number(i, "/integrator", "max_step", s.max_step);
    s.escape_offset = get_number(i, "/integrator", "escape_offset", s.escape_offset);
    s.tracking_tube = get_number(i, "/integrator", "tracking_tube", s.tracking_tube);
    if (i.contains("horizon")) s.horizon = get_number(i, "/integrator", "horizon");
    s.horizon_slack = get_number(i, "/integrator", "horizon_slack", s.horizon_slack);
    if (i.contains("stiff")) {
        if (!i["stiff"].is_boolean()) fail("/integrator/stiff", "expected a boolean");
        s.stiff = i["stiff"].get<bool>();
    }
    s.dwell_tube = get_number(i, "/integrator", "dwell_tube", s.dwell_tube);
    if (!(s.rel_tol > 0.0) || !(s.abs_tol > 0.0))
        fail("/integrator", "tolerances must be > 0");
    return s;
}

GridSpec parse_grid(const json& j, const ForcingProfile& forcing) {
    GridSpec g;
    // defaults sized to the forcing's open lambda range
    g.lambda_lo = forcing.lambda_min() + 0.01 * (forcing.lambda_max() - forcing.lambda_min());
    g.lambda_hi = forcing.lambda_max() - 0.01 * (forcing.lambda_max() - forcing.lambda_min());
    g.x_lo = -1.5;
    g.x_hi = 0.45;
    if (!j.contains("scan")) return g;
    const auto& s = j["scan"];
    if (!s.is_object()) fail("/scan", "expected an object");
    reject_unknown(s, "/scan",
                   {"n_x", "n_lambda", "x_lo", "x_hi", "lambda_lo", "lambda_hi", "side"});
    g.n_x = get_int(s, "/scan", "n_x", g.n_x);
    g.n_lambda = get_int(s, "/scan", "n_lambda", g.n_lambda);
    if (g.n_x < 1 || g.n_lambda < 1) fail("/scan", "grid sizes must be >= 1");
    g.x_lo = get_number(s, "/scan", "x_lo", g.x_lo);
    g.x_hi = get_number(s, "/scan", "x_hi", g.x_hi);
    g.lambda_lo = get_number(s, "/scan", "lambda_lo", g.lambda_lo);
    g.lambda_hi = get_number(s, "/scan", "lambda_hi", g.lambda_hi);
    if (!(g.x_lo <= g.x_hi)) fail("/scan", "x_lo must be <= x_hi");
    if (!(g.lambda_lo <= g.lambda_hi)) fail("/scan", "lambda_lo must be <= lambda_hi");
    const std::string side = get_string(s, "/scan", "side", std::string("sa"));
    if (side == "sa")
        g.side = ManifoldSide::Attracting;
    else if (side == "sr")
        g.side = ManifoldSide::Repelling;
    else
        fail("/scan/side", "expected \"sa\" or \"sr\"");
    return g;
}

CanardSettings parse_canard(const json& j, const IntegratorSettings& integ) {
    CanardSettings c;
    c.integrator = integ;
    if (!j.contains("canard")) return c;
    const auto& s = j["canard"];
    if (!s.is_object()) fail("/canard", "expected an object");
    reject_unknown(s, "/canard",
                   {"eta_seed", "s_span", "section_offset", "section_halfwidth",
                    "section_nodes", "tube"});
    c.eta_seed = get_number(s, "/canard", "eta_seed", c.eta_seed);
    c.s_span = get_number(s, "/canard", "s_span", c.s_span);
    c.section_offset = get_number(s, "/canard", "section_offset", c.section_offset);
    c.section_halfwidth =
        get_number(s, "/canard", "section_halfwidth", c.section_halfwidth);
    c.section_nodes = get_int(s, "/canard", "section_nodes", c.section_nodes);
    c.tube = get_number(s, "/canard", "tube", c.tube);
    if (!(c.eta_seed > 0.0) || !(c.tube > 0.0))
        fail("/canard", "eta_seed and tube must be > 0");
    return c;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, "",
                   {"system", "forcing", "integrator", "scan", "canard", "output_dir",
                    "workers"});
    SystemDefinition sys = parse_system(j);
    ForcingProfile forcing = parse_forcing(j);
    IntegratorSettings integ = parse_integrator(j);
    GridSpec grid = parse_grid(j, forcing);
    CanardSettings canard = parse_canard(j, integ);
    std::string out_dir = ".";
    if (j.contains("output_dir")) out_dir = get_string(j, "", "output_dir");
    int workers = get_int(j, "", "workers", 1);
    if (workers < 1) fail("/workers", "must be >= 1");
    return RunConfig{std::move(sys), std::move(forcing), integ, grid, canard,
                     std::move(out_dir), workers};
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fastslow
