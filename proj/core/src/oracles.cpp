#include "distplr/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <unordered_set>

#include "distplr/errors.hpp"
#include "point_index.hpp"

namespace distplr {

namespace {

Point2 as_point(std::span<const double> x) {
  if (x.size() != 2) {
    throw ContractViolation("expected a 2-D configuration, got dimension " +
                            std::to_string(x.size()));
  }
  return {x[0], x[1]};
}

void add_edge(Adjacency& adjacency, std::uint32_t a, std::uint32_t b, double w) {
  adjacency[a].push_back({b, w});
  adjacency[b].push_back({a, w});
}

std::size_t count_edges(const Adjacency& adjacency) {
  std::size_t half = 0;
  for (const auto& list : adjacency) half += list.size();
  return half / 2;
}

}  // namespace

std::vector<double> shortest_costs_from(const Adjacency& adjacency, std::uint32_t source) {
  std::vector<double> cost(adjacency.size(), kInfinity);
  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  cost[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [c, u] = heap.top();
    heap.pop();
    if (c > cost[u]) continue;
    for (const WeightedEdge& e : adjacency[u]) {
      const double next = c + e.weight;
      if (next < cost[e.to]) {
        cost[e.to] = next;
        heap.emplace(next, e.to);
      }
    }
  }
  return cost;
}

// --- Visibility graph ----------------------------------------------------------

std::size_t VisibilityGraph::edge_count() const { return count_edges(adjacency); }

VisibilityGraph build_visibility_graph(const Environment& env, Point2 goal) {
  if (!point_in_free_space(env, goal)) {
    throw InputError("visibility graph goal is not in free space");
  }
  VisibilityGraph vg;
  for (const Polygon& poly : env.obstacles()) {
    vg.vertices.insert(vg.vertices.end(), poly.vertices().begin(), poly.vertices().end());
  }
  vg.goal_index = static_cast<std::uint32_t>(vg.vertices.size());
  vg.vertices.push_back(goal);

  const auto n = static_cast<std::uint32_t>(vg.vertices.size());
  vg.adjacency.assign(n, {});
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (segment_visible(env, vg.vertices[i], vg.vertices[j])) {
        add_edge(vg.adjacency, i, j, distance(vg.vertices[i], vg.vertices[j]));
      }
    }
  }
  vg.cost_to_goal = shortest_costs_from(vg.adjacency, vg.goal_index);
  return vg;
}

double vg_distance(const VisibilityGraph& vg, const Environment& env, Point2 x) {
  if (!point_in_free_space(env, x)) return kInfinity;
  double best = kInfinity;
  for (std::uint32_t v = 0; v < vg.vertices.size(); ++v) {
    const double via = distance(x, vg.vertices[v]) + vg.cost_to_goal[v];
    if (via < best && segment_visible(env, x, vg.vertices[v])) best = via;
  }
  return best;
}

// --- PRM* ----------------------------------------------------------------------

Roadmap::Roadmap(std::vector<Point2> vertices, Adjacency adjacency, std::uint32_t goal_index)
    : vertices_(std::move(vertices)),
      adjacency_(std::move(adjacency)),
      goal_index_(goal_index),
      index_(std::make_unique<detail::PointIndex>(vertices_)) {
  if (adjacency_.size() != vertices_.size() || goal_index_ >= vertices_.size()) {
    throw ContractViolation("roadmap adjacency does not match its vertices");
  }
  cost_to_goal_ = shortest_costs_from(adjacency_, goal_index_);
}

Roadmap::~Roadmap() = default;
Roadmap::Roadmap(Roadmap&&) noexcept = default;
Roadmap& Roadmap::operator=(Roadmap&&) noexcept = default;

std::size_t Roadmap::edge_count() const { return count_edges(adjacency_); }

void Roadmap::for_each_nearest(
    Point2 query, const std::function<bool(std::uint32_t, double)>& visit) const {
  index_->for_each_nearest(query, visit);
}

std::size_t prm_star_neighbors(std::size_t vertex_count) {
  if (vertex_count < 2) return 0;
  const double k = 2.0 * std::numbers::e * std::log(static_cast<double>(vertex_count));
  return static_cast<std::size_t>(std::ceil(k));
}

Roadmap build_prm_star(const Environment& env, Point2 goal, std::size_t sample_count,
                       std::uint64_t seed) {
  if (sample_count == 0) throw ContractViolation("PRM* needs at least one sample");
  if (!point_in_free_space(env, goal)) throw InputError("PRM* goal is not in free space");

  std::mt19937_64 rng(seed);
  const Box2& b = env.bounds();
  std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x);
  std::uniform_real_distribution<double> uy(b.lo.y, b.hi.y);

  std::vector<Point2> vertices;
  vertices.reserve(sample_count + 1);
  const std::size_t max_rejections = 1000 * sample_count;
  std::size_t rejections = 0;
  while (vertices.size() < sample_count) {
    const double x = ux(rng);
    const double y = uy(rng);
    const Point2 p{x, y};
    if (point_in_free_space(env, p)) {
      vertices.push_back(p);
    } else if (++rejections > max_rejections) {
      throw InputError("free-space sampling failed: too many rejected samples");
    }
  }
  const auto goal_index = static_cast<std::uint32_t>(vertices.size());
  vertices.push_back(goal);

  const std::size_t n = vertices.size();
  const std::size_t k = std::min(prm_star_neighbors(n), n - 1);
  const detail::PointIndex index(vertices);

  Adjacency adjacency(n);
  std::unordered_set<std::uint64_t> tested;
  tested.reserve(n * k);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j : index.k_nearest(vertices[i], k, i)) {
      const std::uint64_t key = (std::uint64_t{std::min(i, j)} << 32) | std::max(i, j);
      if (!tested.insert(key).second) continue;
      if (segment_visible(env, vertices[i], vertices[j])) {
        add_edge(adjacency, i, j, distance(vertices[i], vertices[j]));
      }
    }
  }
  return Roadmap(std::move(vertices), std::move(adjacency), goal_index);
}

double prm_distance(const Roadmap& roadmap, const Environment& env, Point2 x) {
  if (!point_in_free_space(env, x)) return kInfinity;
  const auto& cost = roadmap.cost_to_goal();
  double result = kInfinity;
  roadmap.for_each_nearest(x, [&](std::uint32_t v, double d) {
    if (!std::isfinite(cost[v])) return false;
    if (!segment_visible(env, x, roadmap.vertices()[v])) return false;
    result = d + cost[v];
    return true;
  });
  return result;
}

// --- Oracles -----------------------------------------------------------------------

VisibilityGraphOracle::VisibilityGraphOracle(Environment env, Point2 goal)
    : env_(std::move(env)), graph_(build_visibility_graph(env_, goal)), goal_{goal.x, goal.y} {}

double VisibilityGraphOracle::evaluate(std::span<const double> x) const {
  return vg_distance(graph_, env_, as_point(x));
}

RoadmapOracle::RoadmapOracle(Environment env, Point2 goal, std::size_t sample_count,
                             std::uint64_t seed)
    : env_(std::move(env)),
      roadmap_(build_prm_star(env_, goal, sample_count, seed)),
      goal_{goal.x, goal.y} {}

double RoadmapOracle::evaluate(std::span<const double> x) const {
  return prm_distance(roadmap_, env_, as_point(x));
}

double EuclideanOracle::evaluate(std::span<const double> x) const {
  if (x.size() != goal_.size()) throw ContractViolation("configuration dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += (x[i] - goal_[i]) * (x[i] - goal_[i]);
  return std::sqrt(sum);
}

AffineOracle::AffineOracle(double bias, std::vector<double> slope)
    : bias_(bias), slope_(std::move(slope)), goal_(slope_.size(), 0.0) {
  if (slope_.empty()) throw ContractViolation("affine oracle needs at least one dimension");
}

double AffineOracle::evaluate(std::span<const double> x) const {
  if (x.size() != slope_.size()) throw ContractViolation("configuration dimension mismatch");
  double v = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) v += slope_[i] * x[i];
  return v;
}

}  // namespace distplr
