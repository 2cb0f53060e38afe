// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "distplr/analysis.hpp"
#include "distplr/geometry.hpp"
#include "distplr/oracles.hpp"
#include "distplr/planner.hpp"
#include "distplr/plr.hpp"

namespace {

using namespace distplr;

const std::string kFixtures = DISTPLR_FIXTURE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

Environment fixture_env(const std::string& name) {
  return load_environment(kFixtures + "/" + name + ".json");
}

// Cramer's rule for the 3x3 system [1 x y] c = v through three points.
std::vector<double> solve_plane_3x3(const double pts[3][3]) {
  auto det3 = [](double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  double m[3][3];
  for (int r = 0; r < 3; ++r) {
    m[r][0] = 1.0;
    m[r][1] = pts[r][0];
    m[r][2] = pts[r][1];
  }
  const double d = det3(m);
  std::vector<double> c(3);
  for (int col = 0; col < 3; ++col) {
    double mc[3][3];
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) mc[r][k] = (k == col) ? pts[r][2] : m[r][k];
    }
    c[col] = det3(mc) / d;
  }
  return c;
}

Outcome toy_plane() {
  const double sqrt2 = std::sqrt(2.0);
  const double pts[3][3] = {{0, 0, 0}, {1, 0, 1}, {1, 1, sqrt2}};
  const auto expected = solve_plane_3x3(pts);

  std::vector<Sample> samples;
  for (const auto& p : pts) samples.push_back({{p[0], p[1]}, p[2]});
  const Coefficients c = compute_coefficients(samples);
  const PlrTree tree(make_cell({0, 0}, {1, 1}), {PlrTree::Node{NodeKind::leaf}}, c.values);

  double coeff_err = 0.0;
  for (int i = 0; i < 3; ++i) coeff_err = std::max(coeff_err, std::abs(c.values[i] - expected[i]));
  const double stated[3] = {0.0, 1.0, sqrt2 - 1.0};
  for (int i = 0; i < 3; ++i) coeff_err = std::max(coeff_err, std::abs(c.values[i] - stated[i]));
  const double q = tree.query(std::vector<double>{1.0, 1.0});
  const double q_err = std::abs(q - sqrt2);
  return {coeff_err <= 1e-12 && q_err <= 1e-12,
          "coef err " + fmt(coeff_err) + ", query(1,1) err " + fmt(q_err)};
}

Outcome approximation_bound() {
  const EuclideanOracle oracle({0.0, 0.0});
  const Cell root = make_cell({0, 0}, {1, 1});
  const PlrTree tree = build_plr(oracle, root, {9, 0.0});
  const ErrorReport report = error_map(tree, oracle, 256);
  const double bound = 2.5 * 1.0 * std::pow(2.0, -4) * std::sqrt(2.0);
  const BoundCheck check = check_bounds(tree, oracle, {1.1, 256, 256, 7});
  std::string detail = "max err " + fmt(report.max_error) + " <= " + fmt(bound) +
                       ", cells " + std::to_string(check.cells_checked) + ", violations " +
                       std::to_string(check.violations) + ", worst ratio " +
                       fmt(check.worst_ratio);
  if (check.violations > 0 && check.witness) {
    detail += ", witness lo=(" + fmt(check.witness->lo[0]) + "," + fmt(check.witness->lo[1]) +
              ") hi=(" + fmt(check.witness->hi[0]) + "," + fmt(check.witness->hi[1]) + ")";
  }
  return {report.max_error <= 0.221 && check.violations == 0 && check.cells_checked > 0, detail};
}

// Geodesic and Euclidean distances are 1-Lipschitz on pairwise-visible cells; kappa is
// that constant inflated by 10%.
constexpr double kKappa = 1.1;

Outcome spread_bound() {
  const Environment maze = fixture_env("maze");
  const VisibilityGraphOracle vg(maze, {0.1, 0.09});
  const Cell root = cell_from_bounds(maze.bounds());
  const PlrTree maze_tree = build_plr(vg, root, {9, 0.0});
  const BoundCheck maze_check =
      check_bounds(maze_tree, vg, {kKappa, 0, 10000, 11}, free_space_certifier(maze));

  const EuclideanOracle euclid({0.0, 0.0});
  const PlrTree euclid_tree = build_plr(euclid, make_cell({0, 0}, {1, 1}), {9, 0.0});
  const BoundCheck euclid_check = check_bounds(euclid_tree, euclid, {kKappa, 0, 10000, 13});

  const bool ok = maze_check.spread_violations == 0 && euclid_check.spread_violations == 0 &&
                  maze_check.cells_checked > 0 && euclid_check.cells_checked > 0;
  return {ok, "maze: " + std::to_string(maze_check.cells_checked) + " certified of " +
                  std::to_string(maze_tree.leaf_count()) + " cells, worst spread ratio " +
                  fmt(maze_check.spread_worst_ratio) + ", violations " +
                  std::to_string(maze_check.spread_violations) + "; euclid: " +
                  std::to_string(euclid_check.cells_checked) + " cells, worst ratio " +
                  fmt(euclid_check.spread_worst_ratio) + ", violations " +
                  std::to_string(euclid_check.spread_violations)};
}

constexpr std::size_t kRoadmapSamples = 10000;
const Point2 kMazeGoal{0.1, 0.09};

Outcome table_ordering() {
  const Environment maze = fixture_env("maze");
  const VisibilityGraphOracle vg(maze, kMazeGoal);
  const Cell root = cell_from_bounds(maze.bounds());
  const BuildParams params{9, 0.0};
  const PlrTree plr_vg = build_plr(vg, root, params);
  const ErrorReport e_plr_vg = error_map(plr_vg, vg, 256);

  bool ok = true;
  std::string detail = "PLR(VG) max err " + fmt(e_plr_vg.max_error);
  for (std::uint64_t seed : {42, 7, 2024}) {
    const RoadmapOracle prm(maze, kMazeGoal, kRoadmapSamples, seed);
    const PlrTree plr_prm = build_plr(prm, root, params);
    const ErrorReport e_plr_prm = error_map(plr_prm, vg, 256);
    const ErrorReport e_prm =
        error_map([&](std::span<const double> x) { return prm.evaluate(x); }, vg, root, 256);
    const bool order = e_plr_vg.max_error <= e_plr_prm.max_error &&
                       e_plr_prm.max_error <= e_prm.max_error;
    const std::size_t plr_bytes = memory_footprint(plr_prm);
    const std::size_t roadmap_bytes = prm.roadmap().estimated_bytes();
    const double percent =
        100.0 * static_cast<double>(plr_bytes) / static_cast<double>(roadmap_bytes);
    ok = ok && order && percent <= 5.0;
    detail += "; seed " + std::to_string(seed) + ": PLR(PRM) " + fmt(e_plr_prm.max_error) +
              " <= PRM " + fmt(e_prm.max_error) + ", bytes " + std::to_string(plr_bytes) +
              " vs roadmap " + std::to_string(roadmap_bytes) + " (" + fmt(percent) + "%)";
  }
  return {ok, detail};
}

Outcome linear_exactness() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_int_distribution<int> depth_dist(0, 10);
  std::uniform_real_distribution<double> z_dist(0.0, 0.1);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::size_t>(dim_dist(rng));
    std::vector<double> slope(n);
    for (auto& s : slope) s = coef(rng);
    const AffineOracle oracle(coef(rng), slope);
    ConfigVector lo(n);
    ConfigVector hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = coef(rng);
      hi[i] = lo[i] + 0.1 + std::abs(coef(rng));
    }
    const BuildParams params{static_cast<std::size_t>(depth_dist(rng)), z_dist(rng)};
    const PlrTree tree = build_plr(oracle, make_cell(lo, hi), params);
    const std::size_t res = n == 1 ? 1024 : (n == 2 ? 64 : 16);
    worst = std::max(worst, error_map(tree, oracle, res).max_error);
  }
  return {worst <= 1e-9, "worst grid error over 50 affine oracles " + fmt(worst)};
}

Outcome serialization() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_int_distribution<int> depth_dist(0, 7);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(dim_dist(rng));
    ConfigVector goal(n);
    ConfigVector hole(n);
    for (std::size_t i = 0; i < n; ++i) {
      goal[i] = u(rng);
      hole[i] = u(rng);
    }
    const double radius = 0.3 * std::abs(u(rng));
    const FunctionOracle oracle(goal, [=](std::span<const double> x) {
      double dg = 0.0;
      double dh = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        dg += (x[i] - goal[i]) * (x[i] - goal[i]);
        dh += (x[i] - hole[i]) * (x[i] - hole[i]);
      }
      return std::sqrt(dh) < radius ? kInfinity : std::sqrt(dg);
    });
    const BuildParams params{static_cast<std::size_t>(depth_dist(rng)), 0.05 * std::abs(u(rng))};
    const PlrTree tree = build_plr(oracle, make_cell(ConfigVector(n, -1.0), ConfigVector(n, 1.0)),
                                   params);
    const auto bytes = serialize(tree);
    const PlrTree back = deserialize(bytes);
    const auto pool_a = tree.coefficient_pool();
    const auto pool_b = back.coefficient_pool();
    const bool bit_identical =
        pool_a.size() == pool_b.size() &&
        std::memcmp(pool_a.data(), pool_b.data(), pool_a.size() * sizeof(double)) == 0;
    if (!(back == tree) || !bit_identical || serialize(back) != bytes) ++mismatches;
  }
  const EuclideanOracle euclid({0.0, 0.0});
  const PlrTree single = build_plr(euclid, make_cell({0, 0}, {1, 1}), {0, 0.0});
  const std::size_t single_bytes = serialize(single).size();
  return {mismatches == 0 && single_bytes == 70,
          std::to_string(100 - mismatches) + "/100 round trips identical; single-leaf 2-D tree " +
              std::to_string(single_bytes) + " bytes"};
}

PlrTree point_robot_tree(const Environment& env, const ConfigVector& goal) {
  const VisibilityGraphOracle vg(env, {goal[0], goal[1]});
  const Cell root = cell_from_bounds(env.bounds());
  return build_plr(vg, root, BuildParams::defaults_for(root));
}

Heuristic heuristic_for(const PlanProblem& problem) {
  std::vector<PlrTree> trees;
  for (const auto& g : problem.goals) trees.push_back(point_robot_tree(problem.env, g));
  return make_plr_heuristic(std::move(trees), problem.robots);
}

Outcome door_speedup() {
  const PlanProblem problem = load_problem(kFixtures + "/single_door_problem.json");
  const PlanOptions options{problem.budget};
  const PlanResult plain = bl_plan(problem, Heuristic{}, options);
  const PlanResult guided = bl_plan(problem, heuristic_for(problem), options);
  const bool solved = plain.status == PlanStatus::solved && guided.status == PlanStatus::solved;
  const bool valid = validate_path(problem, plain.path).valid &&
                     validate_path(problem, guided.path).valid;
  const double ratio =
      static_cast<double>(guided.samples_placed) / static_cast<double>(plain.samples_placed);
  const double cost_ratio = guided.cost / plain.cost;
  return {solved && valid && ratio <= 1.0 / 3.0 && cost_ratio <= 1.1,
          "samples " + std::to_string(guided.samples_placed) + " with PLR vs " +
              std::to_string(plain.samples_placed) + " without (ratio " + fmt(ratio) +
              "), cost " + fmt(guided.cost) + " vs " + fmt(plain.cost) + " (ratio " +
              fmt(cost_ratio) + "), time " + fmt(guided.elapsed.count()) + "s vs " +
              fmt(plain.elapsed.count()) + "s"};
}

Outcome multi_robot() {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"four_rooms_problem", "cross_problem"}) {
    const PlanProblem problem = load_problem(kFixtures + "/" + name + ".json");
    const PlanResult result = bl_plan(problem, heuristic_for(problem), PlanOptions{{1'000'000}});
    const PathValidation validation = validate_path(problem, result.path);
    double lower = 0.0;
    const double cell_diag = std::sqrt(2.0) * effective_grid(problem).translation;
    for (std::size_t r = 0; r < problem.robots.size(); ++r) {
      const VisibilityGraph vg =
          build_visibility_graph(problem.env, {problem.goals[r][0], problem.goals[r][1]});
      lower += vg_distance(vg, problem.env, {problem.starts[r][0], problem.starts[r][1]});
    }
    lower -= static_cast<double>(problem.robots.size()) * cell_diag;
    const bool this_ok = result.status == PlanStatus::solved && validation.valid &&
                         result.cost >= lower;
    ok = ok && this_ok;
    if (!detail.empty()) detail += "; ";
    detail += name + ": " + to_string(result.status) + ", " +
              std::to_string(result.samples_placed) + " samples, cost " + fmt(result.cost) +
              " >= " + fmt(lower) + (validation.valid ? ", valid" : ", INVALID: " + validation.reason) +
              ", " + fmt(result.elapsed.count()) + "s";
  }
  return {ok, detail};
}

Outcome query_latency() {
  const Environment maze = fixture_env("maze");
  const RoadmapOracle prm(maze, kMazeGoal, kRoadmapSamples, 42);
  const Cell root = cell_from_bounds(maze.bounds());
  const PlrTree tree = build_plr(prm, root, {9, 0.0});

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr std::size_t kQueries = 100000;
  std::vector<double> coords;  // x0, y0, x1, y1, ...
  coords.reserve(2 * kQueries);
  while (coords.size() < 2 * kQueries) {
    const Point2 p{u(rng), u(rng)};
    if (!point_in_free_space(maze, p)) continue;
    coords.push_back(p.x);
    coords.push_back(p.y);
  }

  // Batches alternate between the two so machine drift hits both alike; each batch runs
  // once untimed first so both are measured with warm caches. Per-query time is the batch
  // mean; the median is taken over batches.
  constexpr std::size_t kBatch = 1000;
  volatile double sink = 0.0;
  auto time_batch = [&](std::size_t first, auto&& fn) {
    double acc = 0.0;
    for (std::size_t i = first; i < first + kBatch; ++i) {
      acc += fn(std::span<const double>(coords.data() + 2 * i, 2));
    }
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = first; i < first + kBatch; ++i) {
      acc += fn(std::span<const double>(coords.data() + 2 * i, 2));
    }
    const auto t1 = std::chrono::steady_clock::now();
    sink = sink + acc;
    return std::chrono::duration<double, std::nano>(t1 - t0).count() / kBatch;
  };
  std::vector<double> plr_ns;
  std::vector<double> prm_ns;
  for (std::size_t first = 0; first < kQueries; first += kBatch) {
    plr_ns.push_back(time_batch(first, [&](std::span<const double> x) { return tree.query(x); }));
    prm_ns.push_back(time_batch(first, [&](std::span<const double> x) { return prm.evaluate(x); }));
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  const double plr = median(plr_ns);
  const double prm_t = median(prm_ns);
  const double speedup = prm_t / plr;
  return {speedup >= 100.0, "median PLR " + fmt(plr) + " ns vs PRM " + fmt(prm_t) +
                                " ns per query (speedup " + fmt(speedup) + "x)"};
}

Outcome determinism() {
  const Environment maze = fixture_env("maze");
  const Cell root = cell_from_bounds(maze.bounds());
  auto build_bytes = [&] {
    const RoadmapOracle prm(maze, kMazeGoal, 2000, 77);
    return serialize(build_plr(prm, root, BuildParams::defaults_for(root)));
  };
  const bool trees_equal = build_bytes() == build_bytes();

  const PlanProblem problem = load_problem(kFixtures + "/four_rooms_problem.json");
  auto plan_json = [&] {
    return result_to_json(bl_plan(problem, heuristic_for(problem), PlanOptions{{1'000'000}}));
  };
  const bool plans_equal = plan_json() == plan_json();
  return {trees_equal && plans_equal, std::string("PLR1 bytes ") +
                                          (trees_equal ? "identical" : "DIFFER") +
                                          ", plan JSON " + (plans_equal ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "toy-plane exactness", toy_plane},
      {2, "approximation bound (depth-9 Euclidean)", approximation_bound},
      {3, "value-spread bound on certified cells", spread_bound},
      {4, "error ordering and memory vs roadmap", table_ordering},
      {5, "exactness on affine oracles", linear_exactness},
      {6, "serialization round trip and size", serialization},
      {7, "heuristic speedup in single-door fixture", door_speedup},
      {8, "two-disc four-rooms and crossing fixtures", multi_robot},
      {9, "query latency vs roadmap", query_latency},
      {10, "determinism of builds and plans", determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!outcome.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
