#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "distplr/errors.hpp"
#include "distplr/planner.hpp"
#include "test_support.hpp"

namespace distplr {
namespace {

const double kSqrt2 = std::sqrt(2.0);

Environment unit_env(std::vector<Polygon> obstacles = {}) {
  return Environment({{0, 0}, {1, 1}}, std::move(obstacles));
}

Polygon square(double lo, double hi) { return Polygon({{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}); }

PlanProblem one_disc(Environment env, double r, ConfigVector start, ConfigVector goal,
                     double step) {
  return {std::move(env), {Disc{r}}, {std::move(start)}, {std::move(goal)}, {step}, {}};
}

std::vector<PlrTree> exact_trees(const PlanProblem& p) {
  std::vector<PlrTree> trees;
  const Cell root = cell_from_bounds(p.env.bounds());
  for (const auto& g : p.goals) {
    const VisibilityGraphOracle vg(p.env, {g[0], g[1]});
    trees.push_back(build_plr(vg, root, {9, 0.0}));
  }
  return trees;
}

Heuristic plr_heuristic(const PlanProblem& p) { return make_plr_heuristic(exact_trees(p), p.robots); }

// Breadth-first search over the disc's grid lattice with an independent collision test
// against one axis-aligned box.
int bfs_steps(double x0, double y0, double gx, double gy, double step, double r, double lo,
              double hi) {
  auto free_cell = [&](int i, int j) {
    const double x = x0 + i * step;
    const double y = y0 + j * step;
    if (x - r < 0 || x + r > 1 || y - r < 0 || y + r > 1) return false;
    const double dx = std::max({lo - x, 0.0, x - hi});
    const double dy = std::max({lo - y, 0.0, y - hi});
    return std::hypot(dx, dy) > r;
  };
  const int ti = static_cast<int>(std::lround((gx - x0) / step));
  const int tj = static_cast<int>(std::lround((gy - y0) / step));
  std::map<std::pair<int, int>, int> dist{{{0, 0}, 0}};
  std::deque<std::pair<int, int>> queue{{0, 0}};
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    if (i == ti && j == tj) return dist[{i, j}];
    for (const auto& [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const std::pair next{i + di, j + dj};
      if (dist.count(next) || !free_cell(next.first, next.second)) continue;
      dist[next] = dist[{i, j}] + 1;
      queue.push_back(next);
    }
  }
  return -1;
}

TEST(Plan, UninformedSearchIsGridOptimal) {
  const PlanProblem p = one_disc(unit_env({square(0.4, 0.6)}), 0.047, {0.21, 0.52},
                                 {0.81, 0.52}, 0.03);
  const int steps = bfs_steps(0.21, 0.52, 0.81, 0.52, 0.03, 0.047, 0.4, 0.6);
  ASSERT_GT(steps, 20);
  const PlanResult r = bl_plan(p, {}, {});
  ASSERT_EQ(r.status, PlanStatus::solved);
  EXPECT_NEAR(r.cost, steps * 0.03, 1e-9);
  EXPECT_EQ(r.path.size(), static_cast<std::size_t>(steps) + 1);
  EXPECT_TRUE(validate_path(p, r.path).valid);
}

TEST(Plan, HeuristicRunIsFeasibleAndNotShorterThanOptimal) {
  const PlanProblem p = one_disc(unit_env({square(0.4, 0.6)}), 0.047, {0.21, 0.52},
                                 {0.81, 0.52}, 0.03);
  const int steps = bfs_steps(0.21, 0.52, 0.81, 0.52, 0.03, 0.047, 0.4, 0.6);
  const PlanResult informed = bl_plan(p, plr_heuristic(p), {});
  const PlanResult blind = bl_plan(p, {}, {});
  ASSERT_EQ(informed.status, PlanStatus::solved);
  EXPECT_GE(informed.cost, steps * 0.03 - 1e-9);
  EXPECT_TRUE(validate_path(p, informed.path).valid);
  EXPECT_LT(informed.samples_placed, blind.samples_placed);
}

TEST(Plan, StraightLineInEmptySpace) {
  const PlanProblem p = one_disc(unit_env(), 0.05, {0.2, 0.5}, {0.8, 0.5}, 0.025);
  const PlanResult r = bl_plan(p, plr_heuristic(p), {});
  ASSERT_EQ(r.status, PlanStatus::solved);
  EXPECT_NEAR(r.cost, 0.6, 1e-9);
  EXPECT_LE(r.samples_placed, 2 * 24U);
}

TEST(Plan, SealedGoalIsExhausted) {
  const PlanProblem p = load_problem(test::fixture("sealed_problem.json"));
  const PlanResult r = bl_plan(p, {}, {});
  EXPECT_EQ(r.status, PlanStatus::exhausted);
  EXPECT_TRUE(r.path.empty());
  EXPECT_GT(r.samples_placed, 100U);
}

TEST(Plan, BudgetOfOneExpansion) {
  const PlanProblem p = load_problem(test::fixture("single_door_problem.json"));
  const PlanResult r = bl_plan(p, {}, {{1, 0.0}, false});
  EXPECT_EQ(r.status, PlanStatus::budget_exceeded);
  EXPECT_EQ(r.samples_placed, 1U);
}

TEST(Plan, StartAtGoal) {
  const PlanProblem p = one_disc(unit_env(), 0.05, {0.3, 0.3}, {0.3, 0.3}, 0.025);
  const PlanResult r = bl_plan(p, {}, {});
  ASSERT_EQ(r.status, PlanStatus::solved);
  EXPECT_EQ(r.path.size(), 1U);
  EXPECT_EQ(r.cost, 0.0);
}

TEST(Plan, UninformedExpansionsAreOrderedByCost) {
  const PlanProblem p = one_disc(unit_env({square(0.4, 0.6)}), 0.047, {0.21, 0.52},
                                 {0.81, 0.52}, 0.03);
  const PlanResult r = bl_plan(p, {}, {{1'000'000, 0.0}, true});
  ASSERT_EQ(r.expansions.size(), r.samples_placed);
  for (std::size_t i = 1; i < r.expansions.size(); ++i) {
    ASSERT_LE(r.expansions[i - 1].g, r.expansions[i].g + 1e-12) << i;
    ASSERT_EQ(r.expansions[i].h, 0.0);
  }
}

TEST(Plan, TwoDiscsSwapWithoutOverlap) {
  PlanProblem p{unit_env(), {Disc{0.05}, Disc{0.05}}, {{0.3, 0.5}, {0.7, 0.5}},
                {{0.7, 0.5}, {0.3, 0.5}}, {0.05}, {}};
  const PlanResult r = bl_plan(p, plr_heuristic(p), {});
  ASSERT_EQ(r.status, PlanStatus::solved);
  EXPECT_TRUE(validate_path(p, r.path).valid);
  for (const auto& s : r.path) {
    ASSERT_GE(std::hypot(s[0] - s[2], s[1] - s[3]), 0.1 - 1e-9);
  }
  EXPECT_GT(r.cost, 0.8 - 1e-9);
}

TEST(Plan, RectangleRotates) {
  PlanProblem p{unit_env(), {Rectangle{0.2, 0.05}}, {{0.5, 0.5, 0.0}}, {{0.5, 0.5, kPi / 2}},
                {0.025, kPi / 8}, {}};
  const PlanResult r = bl_plan(p, {}, {});
  ASSERT_EQ(r.status, PlanStatus::solved);
  EXPECT_EQ(r.path.size(), 5U);
  EXPECT_NEAR(r.cost, rotation_radius(Rectangle{0.2, 0.05}) * kPi / 2, 1e-9);
  EXPECT_TRUE(validate_path(p, r.path).valid);
}

TEST(Plan, IsDeterministic) {
  const PlanProblem p = load_problem(test::fixture("single_door_problem.json"));
  const Heuristic h = plr_heuristic(p);
  const PlanResult a = bl_plan(p, h, {});
  const PlanResult b = bl_plan(p, h, {});
  EXPECT_EQ(a.path, b.path);
  EXPECT_EQ(a.samples_placed, b.samples_placed);
  EXPECT_EQ(result_to_json(a), result_to_json(b));
}

TEST(Plan, CostRespectsTheLowerBound) {
  const PlanProblem p = load_problem(test::fixture("single_door_problem.json"));
  const PlanResult r = bl_plan(p, plr_heuristic(p), {});
  ASSERT_EQ(r.status, PlanStatus::solved);
  const VisibilityGraphOracle vg(p.env, {p.goals[0][0], p.goals[0][1]});
  const double step = effective_grid(p).translation;
  EXPECT_GE(r.cost, vg(p.starts[0]) - step * kSqrt2);
}

TEST(Plan, InvalidProblemsThrow) {
  const Environment env = unit_env({square(0.4, 0.6)});
  EXPECT_THROW(bl_plan(one_disc(env, 0.05, {0.5, 0.5}, {0.1, 0.1}, 0.02), {}, {}), InputError);
  EXPECT_THROW(bl_plan(one_disc(env, 0.05, {0.1, 0.1}, {0.37, 0.5}, 0.02), {}, {}), InputError);
  PlanProblem no_bins{unit_env(), {Rectangle{0.1, 0.1}}, {{0.3, 0.3, 0}}, {{0.7, 0.7, 0}},
                      {0.02, 0.0}, {}};
  EXPECT_THROW(validate_problem(no_bins), InputError);
  PlanProblem overlap{unit_env(), {Disc{0.1}, Disc{0.1}}, {{0.3, 0.3}, {0.4, 0.3}},
                      {{0.7, 0.7}, {0.2, 0.8}}, {}, {}};
  EXPECT_THROW(validate_problem(overlap), InputError);
  PlanProblem mismatch{unit_env(), {Rectangle{0.1, 0.1}}, {{0.3, 0.3}}, {{0.7, 0.7}}, {}, {}};
  EXPECT_THROW(validate_problem(mismatch), InputError);
  PlanProblem none{unit_env(), {}, {}, {}, {}, {}};
  EXPECT_THROW(validate_problem(none), InputError);
}

TEST(PathCost, Examples) {
  const std::vector<RobotShape> disc{Disc{0.1}};
  std::vector<CompositeState> single{{0.0, 0.0}};
  EXPECT_EQ(path_cost(single, disc), 0.0);
  std::vector<CompositeState> up;
  for (int k = 0; k <= 10; ++k) up.push_back({0.0, k / 10.0});
  EXPECT_NEAR(path_cost(up, disc), 1.0, 1e-12);
  const std::vector<RobotShape> two{Disc{0.1}, Disc{0.1}};
  std::vector<CompositeState> both{{0, 0, 1, 1}, {1, 0, 1, 1}, {1, 0, 1, 0}};
  EXPECT_NEAR(path_cost(both, two), 2.0, 1e-12);
  const std::vector<RobotShape> rect{Rectangle{0.6, 0.8}};
  std::vector<CompositeState> turn{{0, 0, kPi - 0.1}, {0, 0, -kPi + 0.1}};
  EXPECT_NEAR(path_cost(turn, rect), 0.5 * 0.2, 1e-12);
}

TEST(CompositeHeuristic, SumOfClampedQueries) {
  // Single leaf through (0,0,0), (1,0,1), (1,1,sqrt 2).
  const Cell root = make_cell({0, 0}, {1, 1});
  const PlrTree plane(root, {PlrTree::Node{NodeKind::leaf, 0, 0, 0, 0}}, {0.0, 1.0, kSqrt2 - 1});
  const std::vector<PlrTree> trees{plane, plane};
  const std::vector<RobotShape> shapes{Disc{0.1}, Rectangle{0.1, 0.2}};
  const double state[] = {1, 0, 1, 1, 0.3};
  EXPECT_NEAR(composite_heuristic(trees, shapes, state), 1 + kSqrt2, 1e-12);

  const PlrTree negative(root, {PlrTree::Node{NodeKind::leaf, 0, 0, 0, 0}}, {-0.5, 0.0, 0.0});
  const std::vector<PlrTree> clamp{negative, plane};
  EXPECT_NEAR(composite_heuristic(clamp, shapes, state), kSqrt2, 1e-12);

  using N = PlrTree::Node;
  const PlrTree half(root, {N{NodeKind::internal, 0, 0.5, 2, 0}, N{NodeKind::leaf, 0, 0, 0, 0},
                            N{NodeKind::blocked, 0, 0, 0, 0}},
                     {0.0, 0.0, 0.0});
  const std::vector<PlrTree> blocked{plane, half};
  EXPECT_TRUE(std::isinf(composite_heuristic(blocked, shapes, state)));

  const double outside[] = {1, 0, 1.5, 1, 0.3};
  EXPECT_THROW(composite_heuristic(trees, shapes, outside), DomainError);
  const std::vector<PlrTree> one{plane};
  EXPECT_THROW(composite_heuristic(one, shapes, state), ContractViolation);
  EXPECT_THROW(make_plr_heuristic(one, shapes), ContractViolation);
}

TEST(ValidatePath, ReportsTheFirstViolation) {
  PlanProblem p{unit_env(), {Disc{0.05}, Disc{0.05}}, {{0.2, 0.5}, {0.4, 0.5}},
                {{0.3, 0.5}, {0.4, 0.5}}, {0.05}, {}};
  std::vector<CompositeState> ok{{0.2, 0.5, 0.4, 0.5}, {0.25, 0.5, 0.4, 0.5},
                                 {0.3, 0.5, 0.4, 0.5}};
  EXPECT_TRUE(validate_path(p, ok).valid);

  std::vector<CompositeState> teleport{{0.2, 0.5, 0.4, 0.5}, {0.3, 0.5, 0.4, 0.5}};
  const auto t = validate_path(p, teleport);
  EXPECT_FALSE(t.valid);
  ASSERT_TRUE(t.index.has_value());
  EXPECT_EQ(*t.index, 0U);

  std::vector<CompositeState> diagonal{{0.2, 0.5, 0.4, 0.5}, {0.25, 0.55, 0.4, 0.5}};
  EXPECT_FALSE(validate_path(p, diagonal).valid);

  // Robot 0 walks into robot 1 at step 3.
  std::vector<CompositeState> crash{{0.2, 0.5, 0.4, 0.5}, {0.25, 0.5, 0.4, 0.5},
                                    {0.3, 0.5, 0.4, 0.5}, {0.35, 0.5, 0.4, 0.5}};
  const auto c = validate_path(p, crash);
  EXPECT_FALSE(c.valid);
  ASSERT_TRUE(c.index.has_value());
  EXPECT_EQ(*c.index, 3U);

  std::vector<CompositeState> wrong_start{{0.25, 0.5, 0.4, 0.5}, {0.3, 0.5, 0.4, 0.5}};
  EXPECT_FALSE(validate_path(p, wrong_start).valid);
  std::vector<CompositeState> short_of_goal{{0.2, 0.5, 0.4, 0.5}};
  EXPECT_FALSE(validate_path(p, short_of_goal).valid);
  EXPECT_FALSE(validate_path(p, {}).valid);
}

TEST(ProblemIo, ParsesInlineAndFileEnvironments) {
  const PlanProblem file = load_problem(test::fixture("four_rooms_problem.json"));
  EXPECT_EQ(file.robots.size(), 2U);
  EXPECT_EQ(file.env.obstacles().size(),
            load_environment(test::fixture("four_rooms.json")).obstacles().size());
  const PlanProblem inline_env = parse_problem(R"({
    "environment": {"bounds": [[0,0],[2,1]], "obstacles": []},
    "robots": [{"type": "rectangle", "width": 0.2, "height": 0.1}],
    "starts": [[0.5, 0.5, 0.0]], "goals": [[1.5, 0.5, 1.0]],
    "grid": {"translation": 0.05, "rotation": 0.2},
    "budget": {"max_expansions": 10, "max_seconds": 2.5}})");
  EXPECT_EQ(inline_env.env.bounds().hi.x, 2.0);
  EXPECT_EQ(inline_env.budget.max_expansions, 10U);
  EXPECT_EQ(inline_env.budget.max_seconds, 2.5);
  EXPECT_EQ(inline_env.grid.rotation, 0.2);
  EXPECT_TRUE(std::holds_alternative<Rectangle>(inline_env.robots[0]));
}

TEST(ProblemIo, Errors) {
  const std::string env = R"("environment": {"bounds": [[0,0],[1,1]], "obstacles": [[[0.4,0.4],[0.6,0.4],[0.6,0.6],[0.4,0.6]]]})";
  EXPECT_THROW(parse_problem("{"), InputError);
  EXPECT_THROW(parse_problem("{" + env + "}"), InputError);
  EXPECT_THROW(parse_problem("{" + env + R"(, "robots": [{"type": "blob"}], "starts": [[0.1,0.1]], "goals": [[0.2,0.2]]})"),
               InputError);
  EXPECT_THROW(parse_problem("{" + env + R"(, "robots": [{"type": "disc", "radius": 0.05}], "starts": [[0.5,0.5]], "goals": [[0.2,0.2]]})"),
               InputError);
  EXPECT_THROW(parse_problem("{" + env + R"(, "robots": [{"type": "disc", "radius": 0.05}], "starts": [[0.1,0.1]], "goals": []})"),
               InputError);
  EXPECT_THROW(parse_problem(R"({"environment": "nowhere.json", "robots": [], "starts": [], "goals": []})",
                             test::fixture("")),
               InputError);
  EXPECT_THROW(load_problem(test::fixture("missing_problem.json")), InputError);
}

TEST(ProblemIo, ResultExport) {
  PlanResult r;
  r.status = PlanStatus::solved;
  r.cost = 0.5;
  r.samples_placed = 7;
  r.path = {{0.1, 0.2}, {0.1, 0.3}};
  r.elapsed = std::chrono::duration<double>(1.25);
  r.expansions = {{{0.1, 0.2}, 0.0, 0.4}, {{0.1, 0.3}, 0.1, 0.3}};
  const auto doc = nlohmann::json::parse(result_to_json(r));
  EXPECT_EQ(doc.at("status"), "solved");
  EXPECT_EQ(doc.at("samples_placed"), 7);
  EXPECT_EQ(doc.at("path").size(), 2U);
  EXPECT_FALSE(doc.contains("elapsed_seconds"));
  EXPECT_EQ(nlohmann::json::parse(result_to_json(r, true)).at("elapsed_seconds"), 1.25);

  const auto path = test::scratch_dir() / "trace.csv";
  write_expansion_csv(path, r);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "order,g,h,s0,s1");
  EXPECT_EQ(first, "0,0,0.4,0.1,0.2");
}

}  // namespace
}  // namespace distplr
