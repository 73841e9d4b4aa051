#include "fastslow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fastslow {

namespace {

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dest(path);
    if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
    const fs::path tmp = dest.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, dest);
}

std::string csv_from_grid(const ScanGrid& grid) {
    std::ostringstream out;
    out << "lambda,x,verdict\n";
    for (int il = 0; il < grid.spec.n_lambda; ++il)
        for (int ix = 0; ix < grid.spec.n_x; ++ix)
            out << fmt(grid.lambdas[il]) << ',' << fmt(grid.xs[ix]) << ','
                << to_string(grid.at(il, ix)) << '\n';
    return out.str();
}

std::string csv_from_trajectory(const Trajectory& traj) {
    std::ostringstream out;
    out << "# verdict=" << to_string(traj.verdict) << " verdict_time="
        << fmt(traj.verdict_time) << " final_distance=" << fmt(traj.final_distance)
        << " dwell_s_r=" << fmt(traj.dwell_s_r) << '\n';
    out << "tau,x,y,lambda\n";
    for (const auto& s : traj.samples)
        out << fmt(s.t) << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.lambda)
            << '\n';
    return out.str();
}

std::string csv_from_manifold(const CriticalManifoldSlice& slice) {
    std::ostringstream out;
    out << "# lambda=" << fmt(slice.lambda) << " folds=" << slice.folds.size();
    for (const auto& f : slice.folds) out << " fold_x=" << fmt(f.x_F);
    if (slice.equilibrium)
        out << " equilibrium_x=" << fmt(slice.equilibrium->first)
            << " equilibrium_y=" << fmt(slice.equilibrium->second);
    out << '\n';
    out << "branch,stability,x,y\n";
    for (size_t b = 0; b < slice.branches.size(); ++b) {
        const auto& br = slice.branches[b];
        const char* st = br.stability == Stability::Attracting ? "attracting" : "repelling";
        for (const auto& [x, y] : br.samples)
            out << b << ',' << st << ',' << fmt(x) << ',' << fmt(y) << '\n';
    }
    return out.str();
}

std::string csv_from_singular_canard(const SingularCanard& c) {
    std::ostringstream out;
    out << "# kind=singular branch=" << to_string(c.branch)
        << " singularity=" << to_string(c.singularity.kind)
        << " x_star=" << fmt(c.singularity.x_star)
        << " tau_star=" << fmt(c.singularity.tau_star)
        << " lambda_star=" << fmt(c.singularity.lambda_star) << '\n';
    out << "tau,x,y,lambda\n";
    for (const auto& s : c.path)
        out << fmt(s.t) << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.lambda)
            << '\n';
    return out.str();
}

std::string csv_from_maximal_canard(const MaximalCanard& c) {
    std::ostringstream out;
    out << "# kind=" << to_string(c.kind) << " seed=" << fmt(c.seed_parameter)
        << " section_tau=" << fmt(c.section_tau)
        << " section_lambda=" << fmt(c.section_lambda)
        << " dwell_s_r=" << fmt(c.dwell_s_r);
    for (const auto& seg : c.segments)
        out << " segment=" << seg.label << ":[" << fmt(seg.tau_lo) << ','
            << fmt(seg.tau_hi) << ']';
    out << '\n';
    out << "tau,x,y,lambda\n";
    for (const auto& s : c.path.samples)
        out << fmt(s.t) << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.lambda)
            << '\n';
    return out.str();
}

std::string records_from_singularities(const std::vector<FoldedSingularity>& sing) {
    std::ostringstream out;
    for (const auto& s : sing) {
        nlohmann::json rec;
        rec["kind"] = to_string(s.kind);
        rec["x_star"] = s.x_star;
        rec["y_star"] = s.y_star;
        rec["tau_star"] = s.tau_star;
        rec["lambda_star"] = s.lambda_star;
        rec["xi1"] = {s.xi1.real(), s.xi1.imag()};
        rec["xi2"] = {s.xi2.real(), s.xi2.imag()};
        rec["b_sign"] = s.b_sign;
        rec["c_coeff"] = s.c_coeff;
        out << rec.dump() << '\n';
    }
    return out.str();
}

std::string record_from_critical_rate(const CriticalRateReport& report) {
    nlohmann::json rec;
    rec["epsilon_c_singular"] = report.epsilon_c_singular;
    if (report.epsilon_c_empirical) rec["epsilon_c_empirical"] = *report.epsilon_c_empirical;
    if (report.E_delta) rec["E_delta"] = *report.E_delta;
    if (report.order_exponent) rec["order_exponent"] = *report.order_exponent;
    return rec.dump() + "\n";
}

std::string records_from_bands(const BandStructure& bands) {
    std::ostringstream out;
    {
        nlohmann::json rec;
        rec["transect_lambda"] = bands.transect_lambda;
        rec["transect_tau"] = bands.transect_tau;
        rec["boundaries"] = bands.boundaries;
        out << rec.dump() << '\n';
    }
    for (const auto& b : bands.bands) {
        nlohmann::json rec;
        rec["x_lo"] = b.x_lo;
        rec["x_hi"] = b.x_hi;
        rec["width"] = b.width();
        rec["verdict"] = to_string(b.verdict);
        out << rec.dump() << '\n';
    }
    return out.str();
}

std::string svg_from_grid(const ScanGrid& grid, const std::vector<Polyline>& overlays) {
    const int w = 800, h = 600;
    const double lam_lo = grid.spec.lambda_lo, lam_hi = grid.spec.lambda_hi;
    const double x_lo = grid.spec.x_lo, x_hi = grid.spec.x_hi;
    const double lam_span = lam_hi > lam_lo ? lam_hi - lam_lo : 1.0;
    const double x_span = x_hi > x_lo ? x_hi - x_lo : 1.0;
    auto px = [&](double lam) { return (lam - lam_lo) / lam_span * w; };
    auto py = [&](double x) { return h - (x - x_lo) / x_span * h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
        << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    const double cw = static_cast<double>(w) / grid.spec.n_lambda;
    const double ch = static_cast<double>(h) / grid.spec.n_x;
    for (int il = 0; il < grid.spec.n_lambda; ++il) {
        for (int ix = 0; ix < grid.spec.n_x; ++ix) {
            const char* fill = "#ffffff";
            switch (grid.at(il, ix)) {
                case Verdict::Tracked: fill = "#aaaaaa"; break;
                case Verdict::Destabilized: fill = "#ffffff"; break;
                default: fill = "#000000"; break;
            }
            out << "<rect x=\"" << fmt(il * cw) << "\" y=\"" << fmt(h - (ix + 1) * ch)
                << "\" width=\"" << fmt(cw) << "\" height=\"" << fmt(ch) << "\" fill=\""
                << fill << "\"/>\n";
        }
    }
    for (const auto& pl : overlays) {
        out << "<polyline fill=\"none\" stroke=\"#cc0000\" stroke-width=\"1\" "
               "data-label=\""
            << pl.label << "\" points=\"";
        for (const auto& [lam, x] : pl.points) out << fmt(px(lam)) << ',' << fmt(py(x)) << ' ';
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace fastslow
