#pragma once

#include <string>
#include <vector>

#include "fastslow/canard.hpp"
#include "fastslow/desing.hpp"
#include "fastslow/flow.hpp"
#include "fastslow/geometry.hpp"
#include "fastslow/scan.hpp"

namespace fastslow {

/// Writes content to path atomically: a sibling temp file is written, flushed,
/// and renamed over the destination. Throws std::runtime_error on I/O failure.
void write_text_atomic(const std::string& path, const std::string& content);

/// Labeled polyline in the (lambda, x) plane, used for SVG overlays.
struct Polyline {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (lambda, x)
};

std::string csv_from_grid(const ScanGrid& grid);
std::string csv_from_trajectory(const Trajectory& traj);
std::string csv_from_manifold(const CriticalManifoldSlice& slice);
std::string csv_from_singular_canard(const SingularCanard& canard);
std::string csv_from_maximal_canard(const MaximalCanard& canard);

/// One JSON record per folded singularity, newline-delimited.
std::string records_from_singularities(const std::vector<FoldedSingularity>& sing);
std::string record_from_critical_rate(const CriticalRateReport& report);
std::string records_from_bands(const BandStructure& bands);

/// SVG raster of the verdict grid (one rect per cell; white = destabilized,
/// grey = tracked, hatched omitted: exhausted drawn black) with one polyline
/// per overlay.
std::string svg_from_grid(const ScanGrid& grid, const std::vector<Polyline>& overlays);

}  // namespace fastslow
