// distplr: build, query, evaluate and plan with piecewise-linear distance trees.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distplr/analysis.hpp"
#include "distplr/errors.hpp"
#include "distplr/geometry.hpp"
#include "distplr/oracles.hpp"
#include "distplr/planner.hpp"
#include "distplr/plr.hpp"

namespace {

using namespace distplr;

enum ExitCode : int { kOk = 0, kUsage = 1, kInputError = 2, kBudgetExceeded = 3 };

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(9) << v;
  return os.str();
}

Point2 to_point(const std::vector<double>& v, const char* what) {
  if (v.size() != 2) throw InputError(std::string(what) + " needs exactly two coordinates");
  return {v[0], v[1]};
}

// Options shared by the commands that construct an oracle.
struct OracleArgs {
  std::string env_path;
  std::vector<double> goal;
  std::string kind = "vg";
  std::vector<double> coeffs;
  std::vector<double> bounds;
  std::size_t prm_samples = 10000;
  std::uint64_t seed = 1;
};

void add_oracle_options(CLI::App* cmd, OracleArgs& args, const std::string& kind_flag) {
  cmd->add_option("--env", args.env_path, "environment JSON");
  cmd->add_option("--goal", args.goal, "goal x,y")->delimiter(',')->expected(2);
  cmd->add_option(kind_flag, args.kind, "vg, prm or affine")
      ->check(CLI::IsMember({"vg", "prm", "affine"}));
  cmd->add_option("--coeffs", args.coeffs, "affine oracle bias,c1,...,cn")->delimiter(',');
  cmd->add_option("--bounds", args.bounds, "root box lo1,..,lon,hi1,..,hin (affine without --env)")
      ->delimiter(',');
  cmd->add_option("--prm-samples", args.prm_samples, "roadmap sample count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.seed, "roadmap seed");
}

std::optional<Environment> load_env_if_given(const OracleArgs& args) {
  if (args.env_path.empty()) return std::nullopt;
  return load_environment(args.env_path);
}

std::unique_ptr<DistanceOracle> make_oracle(const OracleArgs& args,
                                            const std::optional<Environment>& env) {
  if (args.kind == "affine") {
    if (args.coeffs.size() < 2) throw InputError("--coeffs needs a bias and at least one slope");
    return std::make_unique<AffineOracle>(
        args.coeffs.front(), std::vector<double>(args.coeffs.begin() + 1, args.coeffs.end()));
  }
  if (!env) throw InputError("--env is required for the " + args.kind + " oracle");
  const Point2 goal = to_point(args.goal, "--goal");
  if (args.kind == "vg") return std::make_unique<VisibilityGraphOracle>(*env, goal);
  return std::make_unique<RoadmapOracle>(*env, goal, args.prm_samples, args.seed);
}

Cell root_cell_for(const OracleArgs& args, const std::optional<Environment>& env,
                   std::size_t dimension) {
  if (!args.bounds.empty()) {
    if (args.bounds.size() != 2 * dimension) {
      throw InputError("--bounds needs " + std::to_string(2 * dimension) + " values");
    }
    const auto half = args.bounds.begin() + static_cast<std::ptrdiff_t>(dimension);
    try {
      return make_cell({args.bounds.begin(), half}, {half, args.bounds.end()});
    } catch (const ContractViolation& e) {
      throw InputError(std::string("bad --bounds: ") + e.what());
    }
  }
  if (!env) throw InputError("either --env or --bounds must be given");
  if (dimension != 2) throw InputError("an environment only defines a 2-D root cell");
  return cell_from_bounds(env->bounds());
}

// --- build ---------------------------------------------------------------------------

struct BuildArgs {
  OracleArgs oracle;
  std::optional<std::size_t> max_depth;
  std::optional<double> threshold;
  std::string out;
};

int run_build(const BuildArgs& args) {
  const auto env = load_env_if_given(args.oracle);
  const auto oracle = make_oracle(args.oracle, env);
  const Cell root = root_cell_for(args.oracle, env, oracle->dimension());
  BuildParams params = BuildParams::defaults_for(root);
  if (args.max_depth) params.max_depth = *args.max_depth;
  if (args.threshold) {
    if (!(*args.threshold >= 0.0)) throw InputError("--threshold must be non-negative");
    params.error_threshold = *args.threshold;
  }
  const PlrTree tree = build_plr(*oracle, root, params);
  write_plr_file(args.out, tree);

  std::cout << "leaves " << tree.leaf_count() << " (blocked " << tree.blocked_count() << ")\n";
  std::cout << "depth histogram";
  const auto histogram = tree.depth_histogram();
  for (std::size_t d = 0; d < histogram.size(); ++d) {
    if (histogram[d] > 0) std::cout << ' ' << d << ':' << histogram[d];
  }
  std::cout << "\nbytes " << memory_footprint(tree) << '\n';
  return kOk;
}

// --- query ---------------------------------------------------------------------------

int run_query(const std::string& tree_path, const std::vector<double>& point) {
  const PlrTree tree = read_plr_file(tree_path);
  std::cout << fmt(tree.query(point)) << '\n';
  return kOk;
}

// --- eval ----------------------------------------------------------------------------

struct EvalArgs {
  std::string tree;
  OracleArgs reference;
  std::size_t grid = 256;
  bool compare_prm = false;
  std::optional<double> kappa;
  std::size_t bound_samples = 256;
  std::string out_prefix;
};

int run_eval(const EvalArgs& args) {
  const PlrTree tree = read_plr_file(args.tree);
  const auto env = load_env_if_given(args.reference);
  const auto reference = make_oracle(args.reference, env);
  if (reference->dimension() != tree.dimension()) {
    throw InputError("tree dimension " + std::to_string(tree.dimension()) +
                     " does not match reference dimension " +
                     std::to_string(reference->dimension()));
  }
  if (args.grid < 2) throw InputError("--grid must be at least 2");
  const ErrorReport report = error_map(tree, *reference, args.grid);

  std::optional<BoundCheck> bounds;
  if (args.kappa) {
    const CellCertifier certifier = env ? free_space_certifier(*env) : certify_all();
    bounds = check_bounds(tree, *reference, {*args.kappa, args.bound_samples, args.bound_samples,
                                             args.reference.seed}, certifier);
  }

  const std::string prefix = args.out_prefix;
  {
    std::ofstream out(prefix + ".json", std::ios::trunc);
    if (!out) throw InputError("cannot write " + prefix + ".json");
    out << report_to_json(report, bounds) << '\n';
  }
  write_heatmap_csv(prefix + ".csv", report);
  if (report.dimension == 2) write_heatmap_pgm(prefix + ".pgm", report);

  std::cout << "max_error " << fmt(report.max_error) << '\n';
  std::cout << "mean_error " << fmt(report.mean_error) << '\n';
  std::cout << "evaluated " << report.evaluated_points << " skipped " << report.skipped_points
            << '\n';
  std::cout << "bytes " << memory_footprint(tree) << '\n';
  if (bounds) {
    std::cout << "bound_check cells " << bounds->cells_checked << " worst_ratio "
              << fmt(bounds->worst_ratio) << " violations " << bounds->violations
              << " spread_violations " << bounds->spread_violations << '\n';
  }
  if (args.compare_prm) {
    if (!env) throw InputError("--compare-prm needs --env");
    const RoadmapOracle prm(*env, to_point(args.reference.goal, "--goal"),
                            args.reference.prm_samples, args.reference.seed);
    const ErrorReport raw = error_map([&](std::span<const double> x) { return prm.evaluate(x); },
                                      *reference, tree.root_cell(), args.grid);
    std::cout << "prm_max_error " << fmt(raw.max_error) << '\n';
    std::cout << "prm_mean_error " << fmt(raw.mean_error) << '\n';
    std::cout << "roadmap_bytes " << prm.roadmap().estimated_bytes() << '\n';
  }
  return kOk;
}

// --- plan ----------------------------------------------------------------------------

struct PlanArgs {
  std::string problem;
  std::vector<std::string> heuristic{"none"};
  std::optional<std::size_t> max_expansions;
  std::optional<double> max_seconds;
  std::string out;
  std::string trace;
  bool record_elapsed = false;
};

Heuristic load_heuristic(const PlanArgs& args, const PlanProblem& problem) {
  if (args.heuristic.size() == 1 && args.heuristic.front() == "none") return {};
  std::vector<PlrTree> trees;
  if (args.heuristic.size() == 1 && args.heuristic.front() == "auto") {
    for (const ConfigVector& g : problem.goals) {
      const VisibilityGraphOracle vg(problem.env, {g[0], g[1]});
      const Cell root = cell_from_bounds(problem.env.bounds());
      trees.push_back(build_plr(vg, root, BuildParams::defaults_for(root)));
    }
  } else {
    if (args.heuristic.size() != problem.robots.size()) {
      throw InputError("need one heuristic tree per robot (" +
                       std::to_string(problem.robots.size()) + "), got " +
                       std::to_string(args.heuristic.size()));
    }
    for (const std::string& path : args.heuristic) trees.push_back(read_plr_file(path, 2));
  }
  return make_plr_heuristic(std::move(trees), problem.robots);
}

int run_plan(const PlanArgs& args) {
  PlanProblem problem = load_problem(args.problem);
  if (args.max_expansions) problem.budget.max_expansions = *args.max_expansions;
  if (args.max_seconds) problem.budget.max_seconds = *args.max_seconds;
  const Heuristic heuristic = load_heuristic(args, problem);
  PlanOptions options{problem.budget, !args.trace.empty()};
  const PlanResult result = bl_plan(problem, heuristic, options);

  {
    std::ofstream out(args.out, std::ios::trunc);
    if (!out) throw InputError("cannot write " + args.out);
    out << result_to_json(result, args.record_elapsed) << '\n';
  }
  if (!args.trace.empty()) write_expansion_csv(args.trace, result);

  std::cout << "status " << to_string(result.status) << '\n';
  std::cout << "cost " << fmt(result.cost) << '\n';
  std::cout << "samples " << result.samples_placed << '\n';
  std::cout << "seconds " << fmt(result.elapsed.count()) << '\n';
  return result.status == PlanStatus::budget_exceeded ? kBudgetExceeded : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-linear distance-to-goal trees for motion planning"};
  app.require_subcommand(1);

  BuildArgs build;
  CLI::App* build_cmd = app.add_subcommand("build", "construct a tree from a distance oracle");
  add_oracle_options(build_cmd, build.oracle, "--oracle");
  build_cmd->add_option("--max-depth", build.max_depth, "maximum tree depth (default 9)");
  build_cmd->add_option("--threshold", build.threshold,
                        "center error threshold z (default 0.01 x root diagonal)");
  build_cmd->add_option("--out", build.out, "output PLR1 file")->required();

  std::string query_tree;
  std::vector<double> query_point;
  CLI::App* query_cmd = app.add_subcommand("query", "evaluate a tree at one point");
  query_cmd->add_option("--tree", query_tree, "PLR1 file")->required();
  query_cmd->add_option("--point", query_point, "coordinates x1,...,xn")
      ->delimiter(',')
      ->required();

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "error map of a tree against a reference");
  eval_cmd->add_option("--tree", eval.tree, "PLR1 file")->required();
  add_oracle_options(eval_cmd, eval.reference, "--reference");
  eval_cmd->add_option("--grid", eval.grid, "grid points per axis");
  eval_cmd->add_flag("--compare-prm", eval.compare_prm,
                     "also report the raw roadmap oracle's error on the same grid");
  eval_cmd->add_option("--kappa", eval.kappa, "run the per-cell bound check with this kappa");
  eval_cmd->add_option("--bound-samples", eval.bound_samples, "samples and pairs per cell");
  eval_cmd->add_option("--out-prefix", eval.out_prefix, "writes PREFIX.json/.csv/.pgm")
      ->required();

  PlanArgs plan;
  CLI::App* plan_cmd = app.add_subcommand("plan", "grid search for a (multi-)robot problem");
  plan_cmd->add_option("--problem", plan.problem, "problem JSON")->required();
  plan_cmd->add_option("--heuristic", plan.heuristic,
                       "one PLR1 file per robot, 'auto' to build them, or 'none'");
  plan_cmd->add_option("--max-expansions", plan.max_expansions, "expansion budget");
  plan_cmd->add_option("--max-seconds", plan.max_seconds, "wall-clock budget (0 = none)");
  plan_cmd->add_option("--out", plan.out, "result JSON")->required();
  plan_cmd->add_option("--trace", plan.trace, "expansion CSV");
  plan_cmd->add_flag("--record-elapsed", plan.record_elapsed,
                     "include wall-clock time in the result JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*build_cmd) return run_build(build);
    if (*query_cmd) return run_query(query_tree, query_point);
    if (*eval_cmd) return run_eval(eval);
    if (*plan_cmd) return run_plan(plan);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kUsage;
}
