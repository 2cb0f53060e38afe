// Query latency of the PLR against the oracles it replaces, plus build and plan costs.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "distplr/oracles.hpp"
#include "distplr/planner.hpp"
#include "distplr/plr.hpp"

namespace {

using namespace distplr;

const Point2 kGoal{0.1, 0.09};

const Environment& maze() {
  static const Environment env = load_environment(DISTPLR_FIXTURE_DIR "/maze.json");
  return env;
}

// Free query points, fixed across benchmarks so they see the same workload.
const std::vector<Point2>& free_points() {
  static const std::vector<Point2> pts = [] {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point2> out;
    while (out.size() < 4096) {
      const Point2 p{u(rng), u(rng)};
      if (point_in_free_space(maze(), p)) out.push_back(p);
    }
    return out;
  }();
  return pts;
}

void BM_PlrQuery(benchmark::State& state) {
  const VisibilityGraphOracle vg(maze(), kGoal);
  const Cell root = cell_from_bounds(maze().bounds());
  const PlrTree tree = build_plr(vg, root, {static_cast<std::size_t>(state.range(0)), 0.0});
  const auto& pts = free_points();
  std::size_t i = 0;
  for (auto _ : state) {
    const double x[] = {pts[i].x, pts[i].y};
    benchmark::DoNotOptimize(tree.query(x));
    i = (i + 1) & (pts.size() - 1);
  }
  state.counters["bytes"] = static_cast<double>(serialize(tree).size());
}
BENCHMARK(BM_PlrQuery)->Arg(6)->Arg(9)->Arg(12);

void BM_PrmDistance(benchmark::State& state) {
  const Roadmap rm = build_prm_star(maze(), kGoal, static_cast<std::size_t>(state.range(0)), 42);
  const auto& pts = free_points();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prm_distance(rm, maze(), pts[i]));
    i = (i + 1) & (pts.size() - 1);
  }
  state.counters["bytes"] = static_cast<double>(rm.estimated_bytes());
}
BENCHMARK(BM_PrmDistance)->Arg(2000)->Arg(10000);

void BM_VgDistance(benchmark::State& state) {
  const VisibilityGraph vg = build_visibility_graph(maze(), kGoal);
  const auto& pts = free_points();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vg_distance(vg, maze(), pts[i]));
    i = (i + 1) & (pts.size() - 1);
  }
}
BENCHMARK(BM_VgDistance);

void BM_BuildPlr(benchmark::State& state) {
  const VisibilityGraphOracle vg(maze(), kGoal);
  const Cell root = cell_from_bounds(maze().bounds());
  const BuildParams params{static_cast<std::size_t>(state.range(0)), 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(build_plr(vg, root, params));
}
BENCHMARK(BM_BuildPlr)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_BuildRoadmap(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_prm_star(maze(), kGoal, static_cast<std::size_t>(state.range(0)), 42));
  }
}
BENCHMARK(BM_BuildRoadmap)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

// Arg 0: uninformed search, arg 1: PLR heuristic.
void BM_PlanSingleDoor(benchmark::State& state) {
  const PlanProblem problem = load_problem(DISTPLR_FIXTURE_DIR "/single_door_problem.json");
  Heuristic h;
  if (state.range(0) == 1) {
    const Cell root = cell_from_bounds(problem.env.bounds());
    std::vector<PlrTree> trees;
    for (const auto& g : problem.goals) {
      trees.push_back(build_plr(VisibilityGraphOracle(problem.env, {g[0], g[1]}), root,
                                BuildParams::defaults_for(root)));
    }
    h = make_plr_heuristic(std::move(trees), problem.robots);
  }
  std::size_t samples = 0;
  for (auto _ : state) {
    const PlanResult r = bl_plan(problem, h, {problem.budget, false});
    samples = r.samples_placed;
    benchmark::DoNotOptimize(r.cost);
  }
  state.counters["samples"] = static_cast<double>(samples);
}
BENCHMARK(BM_PlanSingleDoor)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
