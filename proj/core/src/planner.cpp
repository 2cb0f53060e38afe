#include "distplr/planner.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "distplr/errors.hpp"

namespace distplr {

namespace {

constexpr double kStateTol = 1e-9;
constexpr std::int64_t kIndexLimit = std::int64_t{1} << 19;

double characteristic_radius(const RobotShape& shape) {
  if (const auto* d = std::get_if<Disc>(&shape)) return d->radius;
  const auto& r = std::get<Rectangle>(shape);
  return 0.5 * std::min(r.width, r.height);
}

// Per-axis layout of the composite grid.
struct GridModel {
  std::vector<double> origin;
  std::vector<double> step;
  std::vector<int> bins;  // > 0 on rotation axes
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> dims;

  GridModel(const PlanProblem& problem, const GridResolution& grid) {
    std::size_t offset = 0;
    for (std::size_t r = 0; r < problem.robots.size(); ++r) {
      const std::size_t d = config_dimension(problem.robots[r]);
      offsets.push_back(offset);
      dims.push_back(d);
      for (std::size_t k = 0; k < d; ++k) {
        origin.push_back(problem.starts[r][k]);
        if (k < 2) {
          step.push_back(grid.translation);
          bins.push_back(0);
        } else {
          const int n = std::max(1, static_cast<int>(std::lround(2.0 * kPi / grid.rotation)));
          bins.push_back(n);
          step.push_back(2.0 * kPi / n);
        }
      }
      offset += d;
    }
  }

  std::size_t size() const { return origin.size(); }

  double coordinate(std::size_t axis, std::int32_t index) const {
    const double v = origin[axis] + index * step[axis];
    return bins[axis] > 0 ? wrap_angle(v) : v;
  }

  std::int32_t normalize(std::size_t axis, std::int64_t index) const {
    if (bins[axis] > 0) {
      const std::int64_t n = bins[axis];
      return static_cast<std::int32_t>(((index % n) + n) % n);
    }
    return static_cast<std::int32_t>(index);
  }

  std::int32_t index_of(std::size_t axis, double value) const {
    if (bins[axis] > 0) {
      return normalize(axis, std::llround(angular_difference(origin[axis], value) / step[axis]));
    }
    return static_cast<std::int32_t>(std::llround((value - origin[axis]) / step[axis]));
  }

  CompositeState state(std::span<const std::int32_t> idx) const {
    CompositeState s(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) s[a] = coordinate(a, idx[a]);
    return s;
  }
};

// Arena-backed hash set of grid states, keyed by node id.
struct StateStore {
  std::size_t width;
  std::vector<std::int32_t> data;

  std::span<const std::int32_t> at(std::uint32_t id) const {
    return {data.data() + std::size_t{id} * width, width};
  }
};

struct StateHash {
  const StateStore* store;
  std::size_t operator()(std::uint32_t id) const {
    std::size_t h = 1469598103934665603ULL;
    for (std::int32_t v : store->at(id)) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ULL;
    }
    return h;
  }
};

struct StateEq {
  const StateStore* store;
  bool operator()(std::uint32_t a, std::uint32_t b) const {
    const auto sa = store->at(a);
    const auto sb = store->at(b);
    return std::equal(sa.begin(), sa.end(), sb.begin());
  }
};

bool robots_clear(const PlanProblem& problem, std::span<const double> state,
                  const GridModel& grid, std::size_t moving) {
  const auto pose = [&](std::size_t r) { return state.subspan(grid.offsets[r], grid.dims[r]); };
  for (std::size_t r = 0; r < problem.robots.size(); ++r) {
    if (r == moving) continue;
    if (shapes_overlap(problem.robots[moving], pose(moving), problem.robots[r], pose(r))) {
      return false;
    }
  }
  return true;
}

bool state_clear(const PlanProblem& problem, std::span<const double> state,
                 const GridModel& grid) {
  for (std::size_t r = 0; r < problem.robots.size(); ++r) {
    if (shape_in_collision(problem.env, problem.robots[r],
                           state.subspan(grid.offsets[r], grid.dims[r]))) {
      return false;
    }
    for (std::size_t s = r + 1; s < problem.robots.size(); ++s) {
      if (shapes_overlap(problem.robots[r], state.subspan(grid.offsets[r], grid.dims[r]),
                         problem.robots[s], state.subspan(grid.offsets[s], grid.dims[s]))) {
        return false;
      }
    }
  }
  return true;
}

std::uint64_t robot_key(std::span<const std::int32_t> idx) {
  std::uint64_t key = 0;
  for (std::int32_t v : idx) key = (key << 21) | static_cast<std::uint64_t>(v + kIndexLimit);
  return key;
}

}  // namespace

std::string to_string(PlanStatus status) {
  switch (status) {
    case PlanStatus::solved:
      return "solved";
    case PlanStatus::exhausted:
      return "exhausted";
    case PlanStatus::budget_exceeded:
      return "budget_exceeded";
  }
  return "unknown";
}

GridResolution effective_grid(const PlanProblem& problem) {
  GridResolution grid = problem.grid;
  if (grid.translation <= 0.0) {
    double r = kInfinity;
    for (const auto& shape : problem.robots) r = std::min(r, characteristic_radius(shape));
    grid.translation = 0.5 * r;
  }
  return grid;
}

void validate_problem(const PlanProblem& problem) {
  const std::size_t n = problem.robots.size();
  if (n == 0) throw InputError("plan problem has no robots");
  if (problem.starts.size() != n || problem.goals.size() != n) {
    throw InputError("robots, starts and goals must have equal length");
  }
  for (std::size_t r = 0; r < n; ++r) {
    const RobotShape& shape = problem.robots[r];
    const bool positive = std::visit(
        [](const auto& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Disc>) {
            return s.radius > 0.0;
          } else {
            return s.width > 0.0 && s.height > 0.0;
          }
        },
        shape);
    if (!positive) throw InputError("robot " + std::to_string(r) + " has non-positive size");
    const std::size_t d = config_dimension(shape);
    if (problem.starts[r].size() != d || problem.goals[r].size() != d) {
      throw InputError("robot " + std::to_string(r) + " start/goal has wrong dimension");
    }
  }
  const GridResolution grid = effective_grid(problem);
  if (!(grid.translation > 0.0) || !(grid.rotation > 0.0)) {
    throw InputError("grid resolution must be positive");
  }
  const Box2& b = problem.env.bounds();
  if (std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y) / grid.translation >= kIndexLimit) {
    throw InputError("grid resolution is too fine for the workspace");
  }

  const GridModel model(problem, grid);
  auto composite = [&](const std::vector<ConfigVector>& per_robot) {
    CompositeState s;
    for (const auto& c : per_robot) s.insert(s.end(), c.begin(), c.end());
    return s;
  };
  if (!state_clear(problem, composite(problem.starts), model)) {
    throw InputError("start configuration is in collision");
  }
  if (!state_clear(problem, composite(problem.goals), model)) {
    throw InputError("goal configuration is in collision");
  }
}

double composite_heuristic(std::span<const PlrTree> trees, std::span<const RobotShape> shapes,
                           std::span<const double> state) {
  if (trees.size() != shapes.size()) {
    throw ContractViolation("need exactly one PLR tree per robot");
  }
  double total = 0.0;
  std::size_t offset = 0;
  for (std::size_t r = 0; r < shapes.size(); ++r) {
    const double xy[2] = {state[offset], state[offset + 1]};
    const double h = trees[r].query(xy);
    if (!std::isfinite(h)) return kInfinity;
    total += std::max(0.0, h);
    offset += config_dimension(shapes[r]);
  }
  return total;
}

Heuristic make_plr_heuristic(std::vector<PlrTree> trees, std::vector<RobotShape> shapes) {
  if (trees.size() != shapes.size()) {
    throw ContractViolation("need exactly one PLR tree per robot");
  }
  for (const PlrTree& t : trees) {
    if (t.dimension() != 2) throw ContractViolation("heuristic trees must be 2-D");
  }
  auto owned = std::make_shared<const std::pair<std::vector<PlrTree>, std::vector<RobotShape>>>(
      std::move(trees), std::move(shapes));
  return [owned](std::span<const double> state) {
    return composite_heuristic(owned->first, owned->second, state);
  };
}

PlanResult bl_plan(const PlanProblem& problem, const Heuristic& heuristic,
                   const PlanOptions& options) {
  validate_problem(problem);
  const auto started = std::chrono::steady_clock::now();
  const GridResolution grid = effective_grid(problem);
  const GridModel model(problem, grid);
  const std::size_t width = model.size();
  const std::size_t robots = problem.robots.size();

  std::vector<double> step_cost(width);
  for (std::size_t r = 0; r < robots; ++r) {
    for (std::size_t k = 0; k < model.dims[r]; ++k) {
      const std::size_t a = model.offsets[r] + k;
      step_cost[a] = model.bins[a] > 0 ? rotation_radius(problem.robots[r]) * model.step[a]
                                       : model.step[a];
    }
  }

  std::vector<std::int32_t> goal_idx(width);
  {
    std::size_t a = 0;
    for (const auto& g : problem.goals) {
      for (double v : g) {
        goal_idx[a] = model.index_of(a, v);
        ++a;
      }
    }
  }
  if (!state_clear(problem, model.state(goal_idx), model)) {
    throw InputError("goal grid cell is in collision");
  }

  StateStore store{width, {}};
  struct NodeInfo {
    std::uint32_t parent;
    double g;
    double h;
    bool closed;
  };
  std::vector<NodeInfo> info;
  std::unordered_set<std::uint32_t, StateHash, StateEq> index(1024, StateHash{&store},
                                                               StateEq{&store});

  struct Entry {
    double f;
    double g;
    std::uint32_t id;
  };
  auto worse = [&store](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    const auto sa = store.at(a.id);
    const auto sb = store.at(b.id);
    return std::lexicographical_compare(sb.begin(), sb.end(), sa.begin(), sa.end());
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  auto estimate = [&](std::span<const double> state) {
    return heuristic ? heuristic(state) : 0.0;
  };

  // Single-robot obstacle checks depend only on that robot's grid cell.
  std::vector<std::unordered_map<std::uint64_t, bool>> free_memo(robots);
  auto robot_free = [&](std::size_t r, std::span<const std::int32_t> idx,
                        std::span<const double> state) {
    const auto sub = idx.subspan(model.offsets[r], model.dims[r]);
    const std::uint64_t key = robot_key(sub);
    auto it = free_memo[r].find(key);
    if (it != free_memo[r].end()) return it->second;
    const bool ok = !shape_in_collision(problem.env, problem.robots[r],
                                        state.subspan(model.offsets[r], model.dims[r]));
    free_memo[r].emplace(key, ok);
    return ok;
  };

  // Start node.
  std::vector<std::int32_t> start_idx(width, 0);
  store.data.insert(store.data.end(), start_idx.begin(), start_idx.end());
  {
    const CompositeState s = model.state(start_idx);
    const double h = estimate(s);
    info.push_back({UINT32_MAX, 0.0, h, false});
    index.insert(0);
    open.push({h, 0.0, 0});
  }

  PlanResult result;
  result.status = PlanStatus::exhausted;
  std::optional<std::uint32_t> goal_node;
  std::vector<std::int32_t> cur(width);
  std::vector<std::int32_t> next(width);

  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    NodeInfo& node = info[top.id];
    if (node.closed || top.g > node.g) continue;

    if (result.samples_placed >= options.budget.max_expansions) {
      result.status = PlanStatus::budget_exceeded;
      break;
    }
    if (options.budget.max_seconds > 0.0 && (result.samples_placed & 1023U) == 0) {
      const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - started;
      if (spent.count() > options.budget.max_seconds) {
        result.status = PlanStatus::budget_exceeded;
        break;
      }
    }

    node.closed = true;
    ++result.samples_placed;
    const auto cur_span = store.at(top.id);
    std::copy(cur_span.begin(), cur_span.end(), cur.begin());
    const double g = node.g;
    if (options.record_expansions) {
      result.expansions.push_back({model.state(cur), g, node.h});
    }
    if (cur == goal_idx) {
      goal_node = top.id;
      result.status = PlanStatus::solved;
      break;
    }

    for (std::size_t r = 0; r < robots; ++r) {
      for (std::size_t k = 0; k < model.dims[r]; ++k) {
        const std::size_t axis = model.offsets[r] + k;
        for (int delta : {-1, 1}) {
          next = cur;
          next[axis] = model.normalize(axis, std::int64_t{cur[axis]} + delta);
          const CompositeState s = model.state(next);
          if (!robot_free(r, next, s)) continue;
          if (!robots_clear(problem, s, model, r)) continue;

          const auto candidate = static_cast<std::uint32_t>(info.size());
          store.data.insert(store.data.end(), next.begin(), next.end());
          const auto [it, inserted] = index.insert(candidate);
          const double g_new = g + step_cost[axis];
          if (inserted) {
            info.push_back({top.id, g_new, estimate(s), false});
            open.push({g_new + info.back().h, g_new, candidate});
            continue;
          }
          store.data.resize(store.data.size() - width);
          NodeInfo& existing = info[*it];
          if (existing.closed || g_new >= existing.g) continue;
          existing.g = g_new;
          existing.parent = top.id;
          open.push({g_new + existing.h, g_new, *it});
        }
      }
    }
  }

  if (goal_node) {
    std::vector<CompositeState> reversed;
    for (std::uint32_t id = *goal_node; id != UINT32_MAX; id = info[id].parent) {
      reversed.push_back(model.state(store.at(id)));
    }
    result.path.assign(reversed.rbegin(), reversed.rend());
    result.cost = path_cost(result.path, problem.robots);
  }
  result.elapsed = std::chrono::steady_clock::now() - started;
  return result;
}

double path_cost(std::span<const CompositeState> path, std::span<const RobotShape> shapes) {
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    std::size_t offset = 0;
    for (const RobotShape& shape : shapes) {
      const auto& a = path[k - 1];
      const auto& b = path[k];
      total += std::hypot(b[offset] - a[offset], b[offset + 1] - a[offset + 1]);
      if (config_dimension(shape) == 3) {
        total += rotation_radius(shape) * std::abs(angular_difference(a[offset + 2], b[offset + 2]));
      }
      offset += config_dimension(shape);
    }
  }
  return total;
}

PathValidation validate_path(const PlanProblem& problem, std::span<const CompositeState> path) {
  auto fail = [](std::optional<std::size_t> at, std::string why) {
    return PathValidation{false, at, std::move(why)};
  };
  if (path.empty()) return fail(std::nullopt, "empty path");

  const GridResolution grid = effective_grid(problem);
  const GridModel model(problem, grid);
  const std::size_t width = model.size();

  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k].size() != width) return fail(k, "state has wrong dimension");
    if (!state_clear(problem, path[k], model)) return fail(k, "state in collision");
  }

  for (std::size_t a = 0; a < width; ++a) {
    const double diff = model.bins[a] > 0 ? angular_difference(model.origin[a], path.front()[a])
                                          : path.front()[a] - model.origin[a];
    if (std::abs(diff) > kStateTol) return fail(0, "path does not begin at the start");
  }
  {
    std::size_t a = 0;
    for (const auto& g : problem.goals) {
      for (double v : g) {
        const double diff = model.bins[a] > 0 ? angular_difference(path.back()[a], v)
                                              : v - path.back()[a];
        if (std::abs(diff) > 0.5 * model.step[a] + kStateTol) {
          return fail(path.size() - 1, "path does not end in the goal cell");
        }
        ++a;
      }
    }
  }

  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    std::size_t moved = 0;
    for (std::size_t a = 0; a < width; ++a) {
      const double diff = model.bins[a] > 0 ? angular_difference(path[k][a], path[k + 1][a])
                                            : path[k + 1][a] - path[k][a];
      if (std::abs(diff) <= kStateTol) continue;
      if (std::abs(std::abs(diff) - model.step[a]) > kStateTol) {
        return fail(k, "transition is not a single grid step");
      }
      ++moved;
    }
    if (moved != 1) return fail(k, "transition must move exactly one axis by one step");
  }
  return {};
}

}  // namespace distplr
