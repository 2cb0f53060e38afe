#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace distplr {

/// A configuration: a point in an n-dimensional configuration space.
using ConfigVector = std::vector<double>;

/// Tolerance for classifying degenerate contact (collinearity, boundary hits).
inline constexpr double kGeometryTolerance = 1e-12;

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Closest distance from `p` to the closed segment [a, b].
double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// Closed-segment intersection test (touching counts).
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

struct Box2 {
  Point2 lo;
  Point2 hi;

  bool contains(Point2 p, double tol = kGeometryTolerance) const {
    return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol;
  }
  double diameter() const { return distance(lo, hi); }
};

/// Simple polygon, stored counter-clockwise. Clockwise input is reversed on construction.
class Polygon {
 public:
  explicit Polygon(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  Point2 vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  const Box2& bounding_box() const noexcept { return bbox_; }
  double area() const;

  /// Within kGeometryTolerance of some edge.
  bool on_boundary(Point2 p) const;
  /// Interior only; boundary points are excluded.
  bool contains_strictly(Point2 p) const;
  /// Interior or boundary.
  bool contains_closed(Point2 p) const { return on_boundary(p) || contains_strictly(p); }
  double boundary_distance(Point2 p) const;

 private:
  bool winding_inside(Point2 p) const;

  std::vector<Point2> vertices_;
  Box2 bbox_;
};

class Environment {
 public:
  Environment(Box2 bounds, std::vector<Polygon> obstacles);

  const Box2& bounds() const noexcept { return bounds_; }
  const std::vector<Polygon>& obstacles() const noexcept { return obstacles_; }
  double diameter() const { return bounds_.diameter(); }

 private:
  Box2 bounds_;
  std::vector<Polygon> obstacles_;
};

/// Parses `{"bounds": [[lx,ly],[hx,hy]], "obstacles": [[[x,y],...], ...]}`.
Environment parse_environment(const std::string& json_text);
Environment load_environment(const std::filesystem::path& path);
std::string environment_to_json(const Environment& env);

/// Inside the (closed) bounds and strictly outside every obstacle.
bool point_in_free_space(const Environment& env, Point2 p);

/// The open segment (a, b) avoids every obstacle interior and stays in bounds.
/// Grazing a vertex or sliding along an edge is visible, unless the edge is
/// shared with another obstacle or with the outside of the bounds.
bool segment_visible(const Environment& env, Point2 a, Point2 b);

struct Disc {
  double radius = 0.0;
};

/// Oriented box. `width` runs along the body x axis, `height` along body y.
struct Rectangle {
  double width = 0.0;
  double height = 0.0;
};

using RobotShape = std::variant<Disc, Rectangle>;

/// Configuration dimension: 2 for discs (x, y), 3 for rectangles (x, y, theta).
std::size_t config_dimension(const RobotShape& shape);

/// Radius used to convert rotation into path length (half-diagonal for rectangles).
double rotation_radius(const RobotShape& shape);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);
/// Shortest signed angular difference b - a, in [-pi, pi).
double angular_difference(double a, double b);

/// Corners of a placed rectangle, counter-clockwise.
std::vector<Point2> rectangle_corners(const Rectangle& rect, std::span<const double> pose);

/// The placed shape touches an obstacle or leaves the bounds.
/// Throws ContractViolation on a pose of the wrong dimension.
bool shape_in_collision(const Environment& env, const RobotShape& shape,
                        std::span<const double> pose);

/// Two placed robots overlap with positive area. Touching is not an overlap.
bool shapes_overlap(const RobotShape& a, std::span<const double> pose_a,
                    const RobotShape& b, std::span<const double> pose_b);

}  // namespace distplr
