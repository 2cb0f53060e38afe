#include "distplr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "distplr/errors.hpp"

namespace distplr {

namespace {

constexpr double kSpreadSlack = 1e-9;

ConfigVector uniform_in(const Cell& cell, std::mt19937_64& rng) {
  ConfigVector p(cell.dimension());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::uniform_real_distribution<double>(cell.lo[i], cell.hi[i])(rng);
  }
  return p;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Point2 to_point(const ConfigVector& v) { return {v[0], v[1]}; }

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

ConfigVector grid_point(const Cell& region, std::size_t resolution, std::size_t index) {
  ConfigVector p(region.dimension());
  for (std::size_t axis = 0; axis < p.size(); ++axis) {
    const std::size_t i = index % resolution;
    index /= resolution;
    const double step = (region.hi[axis] - region.lo[axis]) / static_cast<double>(resolution);
    p[axis] = region.lo[axis] + (static_cast<double>(i) + 0.5) * step;
  }
  return p;
}

ErrorReport error_map(const Estimator& estimate, const DistanceOracle& reference,
                      const Cell& region, std::size_t resolution) {
  if (resolution < 2) throw ContractViolation("error map resolution must be >= 2");
  if (region.dimension() != reference.dimension()) {
    throw ContractViolation("error map region and reference differ in dimension");
  }
  ErrorReport report;
  report.dimension = region.dimension();
  report.grid_resolution = resolution;
  std::size_t total = 1;
  for (std::size_t i = 0; i < report.dimension; ++i) total *= resolution;
  report.heatmap.assign(total, std::numeric_limits<double>::quiet_NaN());

  double sum = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const ConfigVector p = grid_point(region, resolution, idx);
    const double est = estimate(p);
    const double ref = reference.evaluate(p);
    if (!std::isfinite(est) || !std::isfinite(ref)) {
      ++report.skipped_points;
      continue;
    }
    const double err = std::abs(est - ref);
    report.heatmap[idx] = err;
    report.max_error = std::max(report.max_error, err);
    sum += err;
    ++report.evaluated_points;
  }
  if (report.evaluated_points > 0) {
    report.mean_error = sum / static_cast<double>(report.evaluated_points);
  }
  return report;
}

ErrorReport error_map(const PlrTree& tree, const DistanceOracle& reference,
                      std::size_t resolution) {
  return error_map([&tree](std::span<const double> x) { return tree.query(x); }, reference,
                   tree.root_cell(), resolution);
}

std::size_t memory_footprint(const PlrTree& tree) { return serialize(tree).size(); }

double estimate_lipschitz(const DistanceOracle& oracle, const Cell& region, std::size_t pairs,
                          std::uint64_t seed) {
  if (pairs == 0) throw ContractViolation("estimate_lipschitz needs at least one pair");
  std::mt19937_64 rng(seed);
  double kappa = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const ConfigVector p = uniform_in(region, rng);
    const ConfigVector q = uniform_in(region, rng);
    const double dist = euclidean(p, q);
    if (dist <= 0.0) continue;
    const double vp = oracle.evaluate(p);
    const double vq = oracle.evaluate(q);
    if (!std::isfinite(vp) || !std::isfinite(vq)) continue;
    kappa = std::max(kappa, std::abs(vp - vq) / dist);
  }
  return kappa;
}

CellCertifier certify_all() {
  return [](const Cell&, std::span<const ConfigVector>, std::span<const ConfigVector>) {
    return true;
  };
}

CellCertifier free_space_certifier(const Environment& env) {
  return [env](const Cell& cell, std::span<const ConfigVector> base,
               std::span<const ConfigVector> samples) {
    if (cell.dimension() != 2) return false;
    for (const auto& p : base) {
      if (!point_in_free_space(env, to_point(p))) return false;
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
      for (std::size_t j = i + 1; j < base.size(); ++j) {
        if (!segment_visible(env, to_point(base[i]), to_point(base[j]))) return false;
      }
    }
    const Point2 center = to_point(cell.center());
    for (const auto& p : samples) {
      const Point2 q = to_point(p);
      if (!point_in_free_space(env, q) || !segment_visible(env, center, q)) return false;
    }
    return true;
  };
}

BoundCheck check_bounds(const PlrTree& tree, const DistanceOracle& oracle,
                        const BoundCheckParams& params, const CellCertifier& certifier) {
  if (tree.dimension() != oracle.dimension()) {
    throw ContractViolation("tree and oracle differ in dimension");
  }
  if (!(params.kappa >= 0.0)) throw ContractViolation("kappa must be non-negative");
  BoundCheck result;
  result.kappa = params.kappa;
  const double root_n = std::sqrt(static_cast<double>(tree.dimension()));
  std::mt19937_64 rng(params.seed);

  tree.for_each_leaf([&](std::size_t node, const Cell& cell) {
    const LeafPayload payload = tree.payload(node);
    const auto* coeffs = std::get_if<Coefficients>(&payload);
    // Samples are always drawn so the RNG stream does not depend on certification.
    const std::vector<ConfigVector> base = base_points(cell);
    std::vector<ConfigVector> points;
    points.reserve(params.samples_per_cell + 2 * params.pairs_per_cell);
    for (std::size_t i = 0; i < params.samples_per_cell + 2 * params.pairs_per_cell; ++i) {
      points.push_back(uniform_in(cell, rng));
    }
    if (!coeffs || !certifier(cell, base, points)) {
      ++result.cells_skipped;
      return;
    }

    auto value = [&](const ConfigVector& p) { return oracle.evaluate(p); };
    std::vector<double> base_values;
    for (const auto& p : base) base_values.push_back(value(p));
    std::vector<double> values;
    for (const auto& p : points) values.push_back(value(p));
    const bool all_finite =
        std::all_of(base_values.begin(), base_values.end(), [](double v) { return std::isfinite(v); }) &&
        std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    if (!all_finite) {
      ++result.cells_skipped;
      return;
    }
    ++result.cells_checked;

    const double scale = params.kappa * cell.longest_edge() * root_n;

    double approx = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      approx = std::max(approx, std::abs(base_values[i] - coeffs->evaluate(base[i])));
    }
    for (std::size_t i = 0; i < params.samples_per_cell; ++i) {
      approx = std::max(approx, std::abs(values[i] - coeffs->evaluate(points[i])));
    }
    const double approx_bound = 2.5 * scale;
    const double ratio = approx_bound > 0.0 ? approx / approx_bound
                                            : (approx > 0.0 ? kInfinity : 0.0);
    if (ratio > 1.0) ++result.violations;
    if (!result.witness || ratio > result.worst_ratio) result.witness = cell;
    result.worst_ratio = std::max(result.worst_ratio, ratio);

    double spread = 0.0;
    for (std::size_t i = 0; i < params.pairs_per_cell; ++i) {
      const std::size_t a = params.samples_per_cell + 2 * i;
      spread = std::max(spread, std::abs(values[a] - values[a + 1]));
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
      for (std::size_t j = i + 1; j < base.size(); ++j) {
        spread = std::max(spread, std::abs(base_values[i] - base_values[j]));
      }
    }
    const double spread_ratio = scale > 0.0 ? spread / scale : (spread > 0.0 ? kInfinity : 0.0);
    if (spread > scale + kSpreadSlack) ++result.spread_violations;
    result.spread_worst_ratio = std::max(result.spread_worst_ratio, spread_ratio);
  });
  return result;
}

// --- Export ------------------------------------------------------------------------------

void write_heatmap_csv(const std::filesystem::path& path, const ErrorReport& report) {
  auto out = open_output(path, false);
  out << std::setprecision(9);
  const std::size_t res = report.grid_resolution;
  for (std::size_t i = 0; i < report.heatmap.size(); ++i) {
    const double v = report.heatmap[i];
    if (std::isnan(v)) {
      out << "nan";
    } else {
      out << v;
    }
    out << (((i + 1) % res == 0) ? '\n' : ',');
  }
}

void write_heatmap_pgm(const std::filesystem::path& path, const ErrorReport& report) {
  if (report.dimension != 2) throw ContractViolation("PGM heatmaps need a 2-D report");
  const std::size_t res = report.grid_resolution;
  double lo = kInfinity;
  double hi = -kInfinity;
  for (double v : report.heatmap) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  auto out = open_output(path, true);
  out << "P5\n" << res << ' ' << res << "\n255\n";
  for (std::size_t row = res; row-- > 0;) {
    for (std::size_t col = 0; col < res; ++col) {
      const double v = report.heatmap[row * res + col];
      std::uint8_t pixel = 0;
      if (!std::isnan(v)) {
        const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        pixel = static_cast<std::uint8_t>(std::lround(255.0 * t));
      }
      out.put(static_cast<char>(pixel));
    }
  }
}

std::string report_to_json(const ErrorReport& report, const std::optional<BoundCheck>& bounds) {
  using nlohmann::json;
  json doc;
  doc["dimension"] = report.dimension;
  doc["grid_resolution"] = report.grid_resolution;
  doc["max_error"] = report.max_error;
  doc["mean_error"] = report.mean_error;
  doc["evaluated_points"] = report.evaluated_points;
  doc["skipped_points"] = report.skipped_points;
  json heat = json::array();
  for (double v : report.heatmap) {
    if (std::isnan(v)) {
      heat.push_back(nullptr);
    } else {
      heat.push_back(v);
    }
  }
  doc["heatmap"] = std::move(heat);
  if (bounds) {
    json b;
    b["kappa"] = bounds->kappa;
    b["cells_checked"] = bounds->cells_checked;
    b["cells_skipped"] = bounds->cells_skipped;
    b["worst_ratio"] = bounds->worst_ratio;
    b["violations"] = bounds->violations;
    b["spread_worst_ratio"] = bounds->spread_worst_ratio;
    b["spread_violations"] = bounds->spread_violations;
    if (bounds->witness) {
      b["witness"] = {{"lo", bounds->witness->lo}, {"hi", bounds->witness->hi}};
    }
    doc["bound_check"] = std::move(b);
  }
  return doc.dump(2);
}

}  // namespace distplr
