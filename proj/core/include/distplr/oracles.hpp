#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "distplr/geometry.hpp"

namespace distplr {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Black-box cost-to-goal function d_g(x). Returns +inf for unreachable or
/// colliding configurations. Implementations are immutable and thread-safe.
class DistanceOracle {
 public:
  virtual ~DistanceOracle() = default;

  virtual std::size_t dimension() const = 0;
  virtual const ConfigVector& goal() const = 0;
  virtual double evaluate(std::span<const double> x) const = 0;

  double operator()(std::span<const double> x) const { return evaluate(x); }
};

/// Weighted undirected adjacency list.
struct WeightedEdge {
  std::uint32_t to = 0;
  double weight = 0.0;
};
using Adjacency = std::vector<std::vector<WeightedEdge>>;

/// Single-source shortest path costs from `source`; unreachable vertices get +inf.
std::vector<double> shortest_costs_from(const Adjacency& adjacency, std::uint32_t source);

// --- Visibility graph ----------------------------------------------------------

struct VisibilityGraph {
  std::vector<Point2> vertices;  // obstacle corners, goal last
  Adjacency adjacency;
  std::vector<double> cost_to_goal;
  std::uint32_t goal_index = 0;

  Point2 goal() const { return vertices[goal_index]; }
  std::size_t edge_count() const;
};

/// Throws InputError if the goal is not in free space.
VisibilityGraph build_visibility_graph(const Environment& env, Point2 goal);

/// Exact shortest obstacle-avoiding distance from x to the goal (+inf if x is not free
/// or cannot reach the goal).
double vg_distance(const VisibilityGraph& vg, const Environment& env, Point2 x);

// --- PRM* roadmap ----------------------------------------------------------------

namespace detail {
class PointIndex;
}

class Roadmap {
 public:
  Roadmap(std::vector<Point2> vertices, Adjacency adjacency, std::uint32_t goal_index);
  ~Roadmap();
  Roadmap(Roadmap&&) noexcept;
  Roadmap& operator=(Roadmap&&) noexcept;

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  const Adjacency& adjacency() const noexcept { return adjacency_; }
  const std::vector<double>& cost_to_goal() const noexcept { return cost_to_goal_; }
  std::uint32_t goal_index() const noexcept { return goal_index_; }
  std::size_t edge_count() const;

  /// Rough in-memory size of the roadmap: 16 bytes per vertex, 24 per edge.
  std::size_t estimated_bytes() const { return vertices_.size() * 16 + edge_count() * 24; }

  /// Visits vertices in nondecreasing distance from `query` until `visit` returns true.
  void for_each_nearest(Point2 query,
                        const std::function<bool(std::uint32_t, double)>& visit) const;

 private:
  std::vector<Point2> vertices_;
  Adjacency adjacency_;
  std::vector<double> cost_to_goal_;
  std::uint32_t goal_index_;
  std::unique_ptr<detail::PointIndex> index_;
};

/// Neighbor count k(n) = ceil(2e ln n) for a roadmap of n vertices.
std::size_t prm_star_neighbors(std::size_t vertex_count);

/// Builds a k-nearest PRM* roadmap with `sample_count` free samples plus the goal.
/// Throws InputError if the goal collides or free-space sampling keeps failing.
Roadmap build_prm_star(const Environment& env, Point2 goal, std::size_t sample_count,
                       std::uint64_t seed);

/// Cost through the nearest roadmap vertex that x can see and that reaches the goal.
double prm_distance(const Roadmap& roadmap, const Environment& env, Point2 x);

// --- Oracle implementations ------------------------------------------------------

class VisibilityGraphOracle final : public DistanceOracle {
 public:
  VisibilityGraphOracle(Environment env, Point2 goal);

  std::size_t dimension() const override { return 2; }
  const ConfigVector& goal() const override { return goal_; }
  double evaluate(std::span<const double> x) const override;

  const VisibilityGraph& graph() const noexcept { return graph_; }
  const Environment& environment() const noexcept { return env_; }

 private:
  Environment env_;
  VisibilityGraph graph_;
  ConfigVector goal_;
};

class RoadmapOracle final : public DistanceOracle {
 public:
  RoadmapOracle(Environment env, Point2 goal, std::size_t sample_count, std::uint64_t seed);

  std::size_t dimension() const override { return 2; }
  const ConfigVector& goal() const override { return goal_; }
  double evaluate(std::span<const double> x) const override;

  const Roadmap& roadmap() const noexcept { return roadmap_; }
  const Environment& environment() const noexcept { return env_; }

 private:
  Environment env_;
  Roadmap roadmap_;
  ConfigVector goal_;
};

/// Obstacle-free Euclidean distance to the goal, in any dimension.
class EuclideanOracle final : public DistanceOracle {
 public:
  explicit EuclideanOracle(ConfigVector goal) : goal_(std::move(goal)) {}

  std::size_t dimension() const override { return goal_.size(); }
  const ConfigVector& goal() const override { return goal_; }
  double evaluate(std::span<const double> x) const override;

 private:
  ConfigVector goal_;
};

/// d(x) = bias + slope . x
class AffineOracle final : public DistanceOracle {
 public:
  AffineOracle(double bias, std::vector<double> slope);

  std::size_t dimension() const override { return slope_.size(); }
  const ConfigVector& goal() const override { return goal_; }
  double evaluate(std::span<const double> x) const override;

  double bias() const noexcept { return bias_; }
  const std::vector<double>& slope() const noexcept { return slope_; }

 private:
  double bias_;
  std::vector<double> slope_;
  ConfigVector goal_;
};

/// Wraps an arbitrary callable.
class FunctionOracle final : public DistanceOracle {
 public:
  using Function = std::function<double(std::span<const double>)>;

  FunctionOracle(ConfigVector goal, Function fn) : goal_(std::move(goal)), fn_(std::move(fn)) {}

  std::size_t dimension() const override { return goal_.size(); }
  const ConfigVector& goal() const override { return goal_; }
  double evaluate(std::span<const double> x) const override { return fn_(x); }

 private:
  ConfigVector goal_;
  Function fn_;
};

}  // namespace distplr
