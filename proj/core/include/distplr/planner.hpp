#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distplr/geometry.hpp"
#include "distplr/plr.hpp"

namespace distplr {

/// Concatenated per-robot configurations: (x, y) per disc, (x, y, theta) per rectangle.
using CompositeState = std::vector<double>;

struct GridResolution {
  double translation = 0.0;    // 0 selects half the smallest robot radius
  double rotation = kPi / 16;  // snapped so that 2*pi is a whole number of bins
};

struct Budget {
  std::size_t max_expansions = 1'000'000;
  double max_seconds = 0.0;  // 0 disables the wall-clock limit
};

struct PlanProblem {
  Environment env;
  std::vector<RobotShape> robots;
  std::vector<ConfigVector> starts;
  std::vector<ConfigVector> goals;
  GridResolution grid;
  Budget budget;
};

/// Checks shapes, dimensions and that starts/goals are collision-free (including
/// robot-robot). Throws InputError.
void validate_problem(const PlanProblem& problem);

/// Grid resolution with defaults resolved.
GridResolution effective_grid(const PlanProblem& problem);

enum class PlanStatus { solved, exhausted, budget_exceeded };
std::string to_string(PlanStatus status);

struct Expansion {
  CompositeState state;
  double g = 0.0;
  double h = 0.0;
};

struct PlanResult {
  PlanStatus status = PlanStatus::exhausted;
  std::vector<CompositeState> path;
  double cost = 0.0;
  std::size_t samples_placed = 0;
  std::chrono::duration<double> elapsed{0.0};
  std::vector<Expansion> expansions;  // filled when PlanOptions::record_expansions
};

/// Cost-to-go estimate for a composite state; may return +inf.
using Heuristic = std::function<double(std::span<const double>)>;

/// Sum over robots of max(0, PLR estimate at the robot's (x, y)). Any blocked leaf
/// makes the sum +inf. Throws DomainError when a robot lies outside its tree.
double composite_heuristic(std::span<const PlrTree> trees, std::span<const RobotShape> shapes,
                           std::span<const double> state);

Heuristic make_plr_heuristic(std::vector<PlrTree> trees, std::vector<RobotShape> shapes);

struct PlanOptions {
  Budget budget;
  bool record_expansions = false;
};

/// Best-first search over the composite grid, each cell expanded at most once.
/// Ordering: lower f = g + h, then lower g, then lexicographic grid index. An empty
/// heuristic gives the uninformed baseline. Throws InputError on invalid problems.
PlanResult bl_plan(const PlanProblem& problem, const Heuristic& heuristic,
                   const PlanOptions& options);

/// Sum of per-robot path lengths; rotation adds rotation_radius * |dtheta|.
double path_cost(std::span<const CompositeState> path, std::span<const RobotShape> shapes);

struct PathValidation {
  bool valid = true;
  std::optional<std::size_t> index;  // offending state, or transition k -> k+1
  std::string reason;
};

/// Re-checks collisions, grid adjacency, and start/goal agreement of a path.
PathValidation validate_path(const PlanProblem& problem, std::span<const CompositeState> path);

// --- File formats ------------------------------------------------------------------------

/// `environment` may be an inline object or a path relative to `base_dir`.
PlanProblem parse_problem(const std::string& json_text,
                          const std::filesystem::path& base_dir = {});
PlanProblem load_problem(const std::filesystem::path& path);

std::string result_to_json(const PlanResult& result, bool include_elapsed = false);
void write_expansion_csv(const std::filesystem::path& path, const PlanResult& result);

}  // namespace distplr
