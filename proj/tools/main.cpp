#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fastslow/canard.hpp"
#include "fastslow/config.hpp"
#include "fastslow/io.hpp"
#include "fastslow/scan.hpp"

namespace {

using namespace fastslow;

constexpr const char* kDefaultConfig = R"({
  "system": {"name": "paper-example", "delta": 0.01},
  "forcing": {"kind": "logistic-tanh", "lambda_max": 2.5, "epsilon": 0.216}
})";

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    int workers = 0;
    double epsilon = 0.0;
    double delta = -1.0;
    std::string grid;      // "NX,NL"
    std::string side;      // sa | sr
    bool pretty = false;
    bool comoving = false;
    std::optional<double> transect;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--out", f.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--workers", f.workers, "worker thread count (0 = from config)");
    cmd->add_option("--epsilon", f.epsilon, "override forcing rate epsilon");
    cmd->add_option("--delta", f.delta, "override timescale ratio delta");
    cmd->add_option("--grid", f.grid, "grid size as NX,NL");
    cmd->add_option("--side", f.side, "manifold side: sa or sr")
        ->check(CLI::IsMember({"sa", "sr"}));
    cmd->add_flag("--pretty", f.pretty, "also print a human-readable table");
    cmd->add_flag("--comoving", f.comoving,
                  "emit trajectory x relative to the moving stable state");
    cmd->add_option_function<double>(
           "--transect", [&f](const double& v) { f.transect = v; },
           "lambda of the band-extraction transect")
        ->type_name("FLOAT");
}

RunConfig make_config(const CommonFlags& f) {
    RunConfig cfg = f.config_path.empty() ? parse_config(kDefaultConfig)
                                          : load_config(f.config_path);
    if (f.epsilon > 0.0) cfg.forcing = cfg.forcing.with_epsilon(f.epsilon);
    if (f.delta >= 0.0) cfg.system = cfg.system.with_delta(f.delta);
    if (f.workers > 0) cfg.workers = f.workers;
    if (!f.grid.empty()) {
        int nx = 0, nl = 0;
        if (std::sscanf(f.grid.c_str(), "%d,%d", &nx, &nl) != 2 || nx < 1 || nl < 1)
            throw ConfigError("--grid expects NX,NL with positive integers");
        cfg.grid.n_x = nx;
        cfg.grid.n_lambda = nl;
    }
    if (f.side == "sr")
        cfg.grid.side = ManifoldSide::Repelling;
    else if (f.side == "sa")
        cfg.grid.side = ManifoldSide::Attracting;
    cfg.canard.integrator = cfg.integrator;
    return cfg;
}

std::string out_path(const CommonFlags& f, const std::string& name) {
    return (std::filesystem::path(f.out_dir) / name).string();
}

int cmd_manifold(const CommonFlags& f, double lambda) {
    const RunConfig cfg = make_config(f);
    const auto slice = slice_manifold(cfg.system, lambda, {-10.0, 10.0}, 400);
    write_text_atomic(out_path(f, "manifold.csv"), csv_from_manifold(slice));
    if (f.pretty) {
        std::cout << "lambda = " << lambda << ", branches = " << slice.branches.size()
                  << ", folds = " << slice.folds.size() << '\n';
        for (const auto& fp : slice.folds)
            std::cout << "  fold at x = " << fp.x_F << ", y = " << fp.y_F << '\n';
        if (slice.equilibrium)
            std::cout << "  stable state x~ = " << slice.equilibrium->first << '\n';
    }
    return 0;
}

int cmd_singularities(const CommonFlags& f) {
    const RunConfig cfg = make_config(f);
    const auto sing = find_folded_singularities(cfg.system, cfg.forcing);
    write_text_atomic(out_path(f, "singularities.jsonl"),
                      records_from_singularities(sing));
    if (f.pretty) {
        std::cout << sing.size() << " folded singularit" << (sing.size() == 1 ? "y" : "ies")
                  << '\n';
        for (const auto& s : sing)
            std::cout << "  " << to_string(s.kind) << " at lambda* = " << s.lambda_star
                      << ", tau* = " << s.tau_star << ", xi = (" << s.xi1.real()
                      << (s.xi1.imag() != 0 ? "+i*..." : "") << ", " << s.xi2.real()
                      << ")\n";
    }
    return 0;
}

int cmd_critical_rate(const CommonFlags& f, double eps_lo, double eps_hi, bool empirical) {
    const RunConfig cfg = make_config(f);
    CriticalRateReport report;
    if (empirical) {
        GridSpec probe = cfg.grid;
        probe.n_x = 60;
        probe.n_lambda = 60;
        report = empirical_critical_rate(cfg.system, cfg.forcing, cfg.system.delta(),
                                         {eps_lo, eps_hi}, probe, cfg.integrator,
                                         cfg.workers);
    } else {
        report = estimate_critical_rate(cfg.system, cfg.forcing, {eps_lo, eps_hi});
    }
    write_text_atomic(out_path(f, "critical_rate.json"),
                      record_from_critical_rate(report));
    if (f.pretty) {
        std::cout << "epsilon_c (singular limit) = " << report.epsilon_c_singular << '\n';
        if (report.epsilon_c_empirical)
            std::cout << "epsilon_c (delta = " << cfg.system.delta()
                      << ") = " << *report.epsilon_c_empirical << '\n';
    }
    return 0;
}

int cmd_trajectory(const CommonFlags& f, double x0, double lambda0, bool reduced) {
    const RunConfig cfg = make_config(f);
    const FlowContext ctx(cfg.system, cfg.forcing);
    const double tau0 = cfg.forcing.tau_from_lambda(lambda0);
    IntegratorSettings s = cfg.integrator;
    s.record_samples = true;
    s.track_dwell = true;
    Trajectory traj;
    if (reduced) {
        traj = integrate_reduced(ctx, x0, tau0, s);
    } else {
        const double y0 = manifold_y(cfg.system, x0, lambda0);
        traj = integrate_full(ctx, x0, y0, tau0, s);
    }
    if (f.comoving)
        for (auto& smp : traj.samples) smp.x -= ctx.equilibrium_at(smp.lambda).first;
    write_text_atomic(out_path(f, "trajectory.csv"), csv_from_trajectory(traj));
    if (f.pretty)
        std::cout << "verdict = " << to_string(traj.verdict) << " at tau = "
                  << traj.verdict_time << ", dwell near S^r = " << traj.dwell_s_r << '\n';
    return 0;
}

int cmd_canards(const CommonFlags& f) {
    const RunConfig cfg = make_config(f);
    const FlowContext ctx(cfg.system, cfg.forcing);
    int idx = 0;
    std::vector<SingularCanard> all_singular;
    std::vector<MaximalCanard> all_maximal;
    for (const auto& s : ctx.singularities()) {
        const auto sc = singular_canards(cfg.system, cfg.forcing, s, cfg.canard);
        for (const auto& c : sc) {
            write_text_atomic(out_path(f, "singular_canard_" + std::to_string(idx++) +
                                              ".csv"),
                              csv_from_singular_canard(c));
            all_singular.push_back(c);
        }
    }
    if (cfg.system.delta() > 0.0) {
        std::optional<MaximalCanard> strong, weak;
        for (const auto& c : all_singular) {
            if (!c.is_true_canard()) continue;
            try {
                MaximalCanard mc = maximal_canard(ctx, c, cfg.canard);
                if (mc.kind == MaximalKind::StrongNode) strong = mc;
                if (mc.kind == MaximalKind::WeakNode) weak = mc;
                all_maximal.push_back(std::move(mc));
            } catch (const SectionError& e) {
                std::cerr << "note: " << e.what() << '\n';
            }
        }
        if (f.transect) {
            const auto bands = extract_bands_on_transect(
                ctx, *f.transect, cfg.grid.x_lo, cfg.grid.x_hi, cfg.grid.n_x,
                cfg.grid.side, true, cfg.integrator, cfg.workers);
            if (strong && weak)
                for (auto& mc : secondary_canards(ctx, bands, *strong, *weak, cfg.canard))
                    all_maximal.push_back(std::move(mc));
            for (auto& mc :
                 detect_composites(ctx, bands, all_maximal, all_singular, cfg.canard))
                all_maximal.push_back(std::move(mc));
        }
        for (size_t i = 0; i < all_maximal.size(); ++i)
            write_text_atomic(out_path(f, "maximal_canard_" + std::to_string(i) + ".csv"),
                              csv_from_maximal_canard(all_maximal[i]));
    }
    if (f.pretty) {
        std::cout << all_singular.size() << " singular canard(s), " << all_maximal.size()
                  << " maximal canard(s)\n";
        for (const auto& mc : all_maximal) {
            std::cout << "  " << to_string(mc.kind) << " seed x = " << mc.seed_parameter
                      << " dwell = " << mc.dwell_s_r;
            for (const auto& seg : mc.segments)
                std::cout << " [" << seg.label << ": " << seg.tau_lo << ".." << seg.tau_hi
                          << "]";
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_scan(const CommonFlags& f, bool svg) {
    const RunConfig cfg = make_config(f);
    const FlowContext ctx(cfg.system, cfg.forcing);
    const ScanGrid grid = classify_grid(ctx, cfg.grid, cfg.integrator, cfg.workers);
    write_text_atomic(out_path(f, "scan.csv"), csv_from_grid(grid));
    if (svg) {
        std::vector<Polyline> overlays;
        for (const auto& s : ctx.singularities()) {
            for (const auto& c : singular_canards(cfg.system, cfg.forcing, s, cfg.canard)) {
                Polyline pl;
                pl.label = to_string(c.branch);
                for (const auto& smp : c.path) pl.points.push_back({smp.lambda, smp.x});
                overlays.push_back(std::move(pl));
            }
        }
        write_text_atomic(out_path(f, "scan.svg"), svg_from_grid(grid, overlays));
    }
    if (f.transect) {
        const auto bands = extract_bands(ctx, grid, *f.transect, true, cfg.integrator);
        write_text_atomic(out_path(f, "bands.jsonl"), records_from_bands(bands));
        if (f.pretty)
            std::cout << "transect lambda = " << bands.transect_lambda << ": "
                      << bands.boundaries.size() << " boundaries, "
                      << bands.count(Verdict::Destabilized) << " destabilized band(s)\n";
    }
    if (f.pretty)
        std::cout << "grid " << cfg.grid.n_lambda << "x" << cfg.grid.n_x
                  << ", exhausted fraction = " << grid.exhausted_fraction << '\n';
    return 0;
}

int cmd_reproduce(const CommonFlags& flags, const std::string& recipe) {
    CommonFlags f = flags;
    auto case1 = [&](double eps, const std::string& dir) {
        f.epsilon = eps;
        f.out_dir = (std::filesystem::path(flags.out_dir) / dir).string();
        f.config_path.clear();
        return f;
    };
    if (recipe == "fig2a") {
        f = case1(0.06, "fig2a");
        f.grid = "100,100";
        CommonFlags g = f;
        RunConfig cfg = make_config(g);
        cfg.grid.n_x = cfg.grid.n_lambda = 100;
        cfg.grid.x_lo = -1.0;
        cfg.grid.x_hi = 0.4;
        cfg.grid.lambda_lo = -2.4;
        cfg.grid.lambda_hi = 2.4;
        const FlowContext ctx(cfg.system, cfg.forcing);
        const ScanGrid grid = classify_grid(ctx, cfg.grid, cfg.integrator, cfg.workers);
        write_text_atomic(out_path(f, "scan.csv"), csv_from_grid(grid));
        return 0;
    }
    if (recipe == "fig3a") return cmd_scan(case1(0.201, "fig3a"), true);
    if (recipe == "fig3b") return cmd_scan(case1(0.212, "fig3b"), true);
    if (recipe == "fig3c") return cmd_scan(case1(0.216, "fig3c"), true);
    if (recipe == "fig3d") return cmd_scan(case1(0.270, "fig3d"), true);
    if (recipe == "fig4") {
        f = case1(0.204, "fig4");
        f.transect = -0.7;
        const int rc = cmd_scan(f, true);
        if (rc != 0) return rc;
        return cmd_canards(f);
    }
    if (recipe == "fig5a" || recipe == "fig5b") {
        f.out_dir = (std::filesystem::path(flags.out_dir) / recipe).string();
        f.config_path.clear();
        f.epsilon = recipe == "fig5a" ? 0.25 : 1.0;
        RunConfig cfg = parse_config(R"({
          "system": {"name": "paper-example", "delta": 0.01},
          "forcing": {"kind": "exponential-approach", "lambda_max": 2.5, "epsilon": 1.0,
                      "tau_min": 0.0},
          "scan": {"lambda_lo": 0.05, "lambda_hi": 2.45}
        })");
        cfg.forcing = cfg.forcing.with_epsilon(f.epsilon);
        if (f.workers > 0) cfg.workers = f.workers;
        const FlowContext ctx(cfg.system, cfg.forcing);
        const ScanGrid grid = classify_grid(ctx, cfg.grid, cfg.integrator, cfg.workers);
        write_text_atomic(out_path(f, "scan.csv"), csv_from_grid(grid));
        write_text_atomic(out_path(f, "scan.svg"), svg_from_grid(grid, {}));
        return 0;
    }
    throw ConfigError("unknown reproduce recipe: " + recipe +
                      " (expected fig2a, fig3a-d, fig4, fig5a, fig5b)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rate-induced instability analysis for one-fast/one-slow systems"};
    app.require_subcommand(1);

    CommonFlags f;
    double lambda_slice = 0.0;
    double eps_lo = 0.05, eps_hi = 0.45;
    bool empirical = false;
    double x0 = 0.0, lambda0 = 0.0;
    bool reduced = false, svg = false;
    std::string recipe;

    auto* manifold = app.add_subcommand("manifold", "critical manifold slice at fixed lambda");
    add_common(manifold, f);
    manifold->add_option("--lambda", lambda_slice, "lambda of the slice")
        ->capture_default_str();

    auto* singularities =
        app.add_subcommand("singularities", "locate and classify folded singularities");
    add_common(singularities, f);

    auto* critical =
        app.add_subcommand("critical-rate", "critical forcing rate (singular limit)");
    add_common(critical, f);
    critical->add_option("--eps-lo", eps_lo, "bracket bottom")->capture_default_str();
    critical->add_option("--eps-hi", eps_hi, "bracket top")->capture_default_str();
    critical->add_flag("--empirical", empirical, "also measure the delta > 0 rate");

    auto* trajectory = app.add_subcommand("trajectory", "integrate one initial condition");
    add_common(trajectory, f);
    trajectory->add_option("--x0", x0, "initial x on the manifold")->required();
    trajectory->add_option("--lambda0", lambda0, "release lambda (maps to tau0)")
        ->required();
    trajectory->add_flag("--reduced", reduced, "use the projected reduced flow");

    auto* canards = app.add_subcommand("canards", "singular and maximal canards");
    add_common(canards, f);

    auto* scan = app.add_subcommand("scan", "classify a grid of initial conditions");
    add_common(scan, f);
    scan->add_flag("--svg", svg, "also emit an SVG raster");

    auto* reproduce = app.add_subcommand("reproduce", "run a pinned figure recipe");
    add_common(reproduce, f);
    reproduce->add_option("recipe", recipe, "fig2a | fig3a-d | fig4 | fig5a | fig5b")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (manifold->parsed()) return cmd_manifold(f, lambda_slice);
        if (singularities->parsed()) return cmd_singularities(f);
        if (critical->parsed()) return cmd_critical_rate(f, eps_lo, eps_hi, empirical);
        if (trajectory->parsed()) return cmd_trajectory(f, x0, lambda0, reduced);
        if (canards->parsed()) return cmd_canards(f);
        if (scan->parsed()) return cmd_scan(f, svg);
        if (reproduce->parsed()) return cmd_reproduce(f, recipe);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const AssumptionError& e) {
        std::cerr << "assumption violated: " << e.what() << '\n';
        return 2;
    } catch (const SideError& e) {
        std::cerr << "assumption violated: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "assumption violated: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
