#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "distplr/errors.hpp"
#include "distplr/planner.hpp"

namespace distplr {

namespace {

using nlohmann::json;

RobotShape parse_robot(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "disc") return Disc{j.at("radius").get<double>()};
  if (type == "rectangle") {
    return Rectangle{j.at("width").get<double>(), j.at("height").get<double>()};
  }
  throw InputError("unknown robot type '" + type + "'");
}

std::vector<ConfigVector> parse_configs(const json& j) {
  std::vector<ConfigVector> out;
  for (const json& c : j) out.push_back(c.get<ConfigVector>());
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

PlanProblem parse_problem(const std::string& json_text, const std::filesystem::path& base_dir) {
  try {
    const json doc = json::parse(json_text);
    const json& env_field = doc.at("environment");
    Environment env = env_field.is_string()
                          ? load_environment(base_dir / env_field.get<std::string>())
                          : parse_environment(env_field.dump());

    std::vector<RobotShape> robots;
    for (const json& r : doc.at("robots")) robots.push_back(parse_robot(r));

    GridResolution grid;
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      grid.translation = g.value("translation", grid.translation);
      grid.rotation = g.value("rotation", grid.rotation);
    }
    Budget budget;
    if (doc.contains("budget")) {
      const json& b = doc.at("budget");
      budget.max_expansions = b.value("max_expansions", budget.max_expansions);
      budget.max_seconds = b.value("max_seconds", budget.max_seconds);
    }
    PlanProblem problem{std::move(env), std::move(robots), parse_configs(doc.at("starts")),
                        parse_configs(doc.at("goals")), grid, budget};
    validate_problem(problem);
    return problem;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed problem JSON: ") + e.what());
  } catch (const ContractViolation& e) {
    throw InputError(std::string("invalid problem: ") + e.what());
  }
}

PlanProblem load_problem(const std::filesystem::path& path) {
  return parse_problem(read_file(path), path.parent_path());
}

std::string result_to_json(const PlanResult& result, bool include_elapsed) {
  json doc;
  doc["status"] = to_string(result.status);
  doc["cost"] = result.cost;
  doc["samples_placed"] = result.samples_placed;
  if (include_elapsed) doc["elapsed_seconds"] = result.elapsed.count();
  doc["path"] = result.path;
  return doc.dump(2);
}

void write_expansion_csv(const std::filesystem::path& path, const PlanResult& result) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << std::setprecision(9);
  const std::size_t width = result.expansions.empty() ? 0 : result.expansions.front().state.size();
  out << "order,g,h";
  for (std::size_t a = 0; a < width; ++a) out << ",s" << a;
  out << '\n';
  for (std::size_t i = 0; i < result.expansions.size(); ++i) {
    const Expansion& e = result.expansions[i];
    out << i << ',' << e.g << ',' << e.h;
    for (double v : e.state) out << ',' << v;
    out << '\n';
  }
}

}  // namespace distplr
