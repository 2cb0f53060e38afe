#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distplr/geometry.hpp"
#include "distplr/oracles.hpp"
#include "distplr/plr.hpp"

namespace distplr {

/// Pointwise error |estimate - reference| over a uniform grid of cell-centered points.
/// Heatmap is row-major with axis 0 varying fastest; NaN where either side is infinite.
struct ErrorReport {
  std::size_t dimension = 0;
  std::size_t grid_resolution = 0;
  double max_error = 0.0;
  double mean_error = 0.0;
  std::size_t evaluated_points = 0;
  std::size_t skipped_points = 0;
  std::vector<double> heatmap;
};

/// Grid point `index` of a `resolution`-per-axis grid over `region` (pixel centers).
ConfigVector grid_point(const Cell& region, std::size_t resolution, std::size_t index);

using Estimator = std::function<double(std::span<const double>)>;

ErrorReport error_map(const Estimator& estimate, const DistanceOracle& reference,
                      const Cell& region, std::size_t resolution);

/// Error of a PLR over its own root cell. resolution >= 2.
ErrorReport error_map(const PlrTree& tree, const DistanceOracle& reference,
                      std::size_t resolution);

/// Bytes of the PLR1 encoding.
std::size_t memory_footprint(const PlrTree& tree);

/// max |d(p) - d(q)| / |p - q| over `pairs` random finite pairs in the region; 0 if none.
double estimate_lipschitz(const DistanceOracle& oracle, const Cell& region, std::size_t pairs,
                          std::uint64_t seed);

/// Decides whether a leaf may be used for the error-bound checks. Receives the leaf
/// cell, its base points and the sample points drawn inside it.
using CellCertifier = std::function<bool(const Cell&, std::span<const ConfigVector> base_points,
                                         std::span<const ConfigVector> samples)>;

/// Certifies every cell (use with obstacle-free oracles).
CellCertifier certify_all();

/// Certifies a cell whose base points and samples are free, whose base points are
/// pairwise visible, and whose samples are visible from the cell center.
CellCertifier free_space_certifier(const Environment& env);

struct BoundCheckParams {
  double kappa = 1.0;
  std::size_t samples_per_cell = 64;  // points for the approximation-error check
  std::size_t pairs_per_cell = 64;    // pairs for the value-spread check
  std::uint64_t seed = 0;
};

struct BoundCheck {
  double kappa = 0.0;
  std::size_t cells_checked = 0;
  std::size_t cells_skipped = 0;
  // Approximation error |V - L| against (5/2) kappa eps sqrt(n).
  double worst_ratio = 0.0;
  std::size_t violations = 0;
  // Value spread |V(p) - V(q)| against kappa eps sqrt(n) (+1e-9 slack).
  double spread_worst_ratio = 0.0;
  std::size_t spread_violations = 0;
  std::optional<Cell> witness;  // cell with the worst approximation ratio
};

BoundCheck check_bounds(const PlrTree& tree, const DistanceOracle& oracle,
                        const BoundCheckParams& params,
                        const CellCertifier& certifier = certify_all());

// --- Export ----------------------------------------------------------------------------

void write_heatmap_csv(const std::filesystem::path& path, const ErrorReport& report);
/// 8-bit binary PGM, min-max normalized, NaN rendered black, highest row first.
void write_heatmap_pgm(const std::filesystem::path& path, const ErrorReport& report);

std::string report_to_json(const ErrorReport& report,
                           const std::optional<BoundCheck>& bounds = std::nullopt);

}  // namespace distplr
