#include "distplr/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "distplr/errors.hpp"

namespace distplr {

namespace {

constexpr double kTol = kGeometryTolerance;
// Offset used to look across an edge that a segment slides along.
constexpr double kProbeOffset = 1e-9;

int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({1.0, norm(b - a), norm(c - a)});
  if (v > kTol * scale) return 1;
  if (v < -kTol * scale) return -1;
  return 0;
}

bool on_segment(Point2 p, Point2 a, Point2 b) {
  return p.x >= std::min(a.x, b.x) - kTol && p.x <= std::max(a.x, b.x) + kTol &&
         p.y >= std::min(a.y, b.y) - kTol && p.y <= std::max(a.y, b.y) + kTol;
}

bool boxes_overlap(const Box2& a, const Box2& b, double pad) {
  return a.lo.x <= b.hi.x + pad && b.lo.x <= a.hi.x + pad && a.lo.y <= b.hi.y + pad &&
         b.lo.y <= a.hi.y + pad;
}

Box2 bounding_box_of(std::span<const Point2> pts) {
  Box2 box{pts.front(), pts.front()};
  for (const Point2& p : pts) {
    box.lo.x = std::min(box.lo.x, p.x);
    box.lo.y = std::min(box.lo.y, p.y);
    box.hi.x = std::max(box.hi.x, p.x);
    box.hi.y = std::max(box.hi.y, p.y);
  }
  return box;
}

// Closed containment in a convex CCW polygon.
bool convex_contains_closed(std::span<const Point2> poly, Point2 p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (orientation(poly[i], poly[(i + 1) % poly.size()], p) < 0) return false;
  }
  return true;
}

bool convex_contains_strictly(std::span<const Point2> poly, Point2 p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (orientation(poly[i], poly[(i + 1) % poly.size()], p) <= 0) return false;
  }
  return true;
}

double polyline_loop_distance(std::span<const Point2> poly, Point2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

Point2 pose_point(std::span<const double> pose) { return {pose[0], pose[1]}; }

void require_pose(const RobotShape& shape, std::span<const double> pose) {
  if (pose.size() != config_dimension(shape)) {
    throw ContractViolation("pose dimension " + std::to_string(pose.size()) +
                            " does not match robot shape dimension " +
                            std::to_string(config_dimension(shape)));
  }
}

// Projection interval of a convex point set onto an axis.
std::pair<double, double> project(std::span<const Point2> pts, Point2 axis) {
  double lo = dot(pts.front(), axis);
  double hi = lo;
  for (const Point2& p : pts) {
    const double v = dot(p, axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

bool disc_hits_polygon(const Polygon& poly, Point2 c, double r) {
  const Box2& bb = poly.bounding_box();
  if (c.x < bb.lo.x - r - kTol || c.x > bb.hi.x + r + kTol || c.y < bb.lo.y - r - kTol ||
      c.y > bb.hi.y + r + kTol) {
    return false;
  }
  return poly.contains_closed(c) || poly.boundary_distance(c) <= r + kTol;
}

bool rectangle_hits_polygon(const Polygon& poly, std::span<const Point2> corners) {
  if (!boxes_overlap(poly.bounding_box(), bounding_box_of(corners), kTol)) return false;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Point2 a = corners[i];
    const Point2 b = corners[(i + 1) % corners.size()];
    for (std::size_t j = 0; j < poly.size(); ++j) {
      if (segments_intersect(a, b, poly.vertex(j), poly.vertex(j + 1))) return true;
    }
  }
  for (const Point2& v : poly.vertices()) {
    if (convex_contains_closed(corners, v)) return true;
  }
  // Rectangle entirely inside the obstacle.
  return poly.contains_closed(corners.front());
}

}  // namespace

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(c, a, b)) return true;
  if (o2 == 0 && on_segment(d, a, b)) return true;
  if (o3 == 0 && on_segment(a, c, d)) return true;
  if (o4 == 0 && on_segment(b, c, d)) return true;
  return false;
}

// --- Polygon ---------------------------------------------------------------

Polygon::Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw ContractViolation("polygon needs at least 3 vertices");
  for (const Point2& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ContractViolation("polygon vertex is not finite");
    }
  }
  const double a = area();
  if (std::abs(a) <= kTol) throw ContractViolation("polygon has zero area");
  if (a < 0.0) std::reverse(vertices_.begin(), vertices_.end());

  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a0 = vertex(i);
    const Point2 a1 = vertex(i + 1);
    if (distance(a0, a1) <= kTol) throw ContractViolation("polygon has a repeated vertex");
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2 b0 = vertex(j);
      const Point2 b1 = vertex(j + 1);
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (!adjacent) {
        if (segments_intersect(a0, a1, b0, b1)) {
          throw ContractViolation("polygon is self-intersecting");
        }
        continue;
      }
      // Adjacent edges may only share their common vertex; a fold-back overlaps.
      const Point2 shared = (j == i + 1) ? a1 : a0;
      const Point2 p = (j == i + 1) ? a0 : a1;
      const Point2 q = (j == i + 1) ? b1 : b0;
      if (orientation(p, shared, q) == 0 && dot(p - shared, q - shared) > 0.0) {
        throw ContractViolation("polygon is self-intersecting");
      }
    }
  }
  bbox_ = bounding_box_of(vertices_);
}

double Polygon::area() const {
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    twice += cross(vertex(i), vertex(i + 1));
  }
  return 0.5 * twice;
}

double Polygon::boundary_distance(Point2 p) const { return polyline_loop_distance(vertices_, p); }

bool Polygon::on_boundary(Point2 p) const {
  if (!bbox_.contains(p)) return false;
  return boundary_distance(p) <= kTol;
}

bool Polygon::winding_inside(Point2 p) const {
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = vertices_[i];
    const Point2 b = vertices_[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool Polygon::contains_strictly(Point2 p) const {
  if (!bbox_.contains(p, 0.0)) return false;
  return !on_boundary(p) && winding_inside(p);
}

// --- Environment -------------------------------------------------------------

Environment::Environment(Box2 bounds, std::vector<Polygon> obstacles)
    : bounds_(bounds), obstacles_(std::move(obstacles)) {
  if (!(bounds_.lo.x < bounds_.hi.x) || !(bounds_.lo.y < bounds_.hi.y)) {
    throw ContractViolation("environment bounds must satisfy lo < hi");
  }
  for (const Polygon& poly : obstacles_) {
    for (const Point2& v : poly.vertices()) {
      if (!bounds_.contains(v)) throw ContractViolation("obstacle vertex outside bounds");
    }
  }
}

Environment parse_environment(const std::string& json_text) {
  using nlohmann::json;
  try {
    const json doc = json::parse(json_text);
    auto to_point = [](const json& j) {
      if (!j.is_array() || j.size() != 2) throw InputError("point must be [x, y]");
      return Point2{j.at(0).get<double>(), j.at(1).get<double>()};
    };
    const json& b = doc.at("bounds");
    if (!b.is_array() || b.size() != 2) throw InputError("bounds must be [[lo], [hi]]");
    Box2 bounds{to_point(b.at(0)), to_point(b.at(1))};

    std::vector<Polygon> obstacles;
    if (doc.contains("obstacles")) {
      for (const json& poly : doc.at("obstacles")) {
        std::vector<Point2> verts;
        for (const json& v : poly) verts.push_back(to_point(v));
        obstacles.emplace_back(std::move(verts));
      }
    }
    return Environment(bounds, std::move(obstacles));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed environment JSON: ") + e.what());
  } catch (const ContractViolation& e) {
    throw InputError(std::string("invalid environment: ") + e.what());
  }
}

Environment load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open environment file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_environment(buffer.str());
}

std::string environment_to_json(const Environment& env) {
  using nlohmann::json;
  json doc;
  const Box2& b = env.bounds();
  doc["bounds"] = json::array({json::array({b.lo.x, b.lo.y}), json::array({b.hi.x, b.hi.y})});
  doc["obstacles"] = json::array();
  for (const Polygon& poly : env.obstacles()) {
    json verts = json::array();
    for (const Point2& v : poly.vertices()) verts.push_back(json::array({v.x, v.y}));
    doc["obstacles"].push_back(verts);
  }
  return doc.dump();
}

// --- Predicates ----------------------------------------------------------------

bool point_in_free_space(const Environment& env, Point2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  if (!env.bounds().contains(p)) return false;
  for (const Polygon& poly : env.obstacles()) {
    if (poly.contains_closed(p)) return false;
  }
  return true;
}

bool segment_visible(const Environment& env, Point2 a, Point2 b) {
  const Box2& bounds = env.bounds();
  if (!bounds.contains(a) || !bounds.contains(b)) return false;

  const Point2 d = b - a;
  const double len = norm(d);
  if (len <= kTol) {
    for (const Polygon& poly : env.obstacles()) {
      if (poly.contains_strictly(a)) return false;
    }
    return true;
  }
  const double len2 = len * len;
  const Point2 seg_pts[2] = {a, b};
  const Box2 seg_box = bounding_box_of(seg_pts);

  // Looks across an edge the segment slides along: blocked if the far side is
  // another obstacle or outside the bounds.
  auto far_side_blocked = [&](const Polygon& owner, Point2 m) {
    for (std::size_t i = 0; i < owner.size(); ++i) {
      const Point2 p = owner.vertex(i);
      const Point2 q = owner.vertex(i + 1);
      const Point2 e = q - p;
      if (point_segment_distance(m, p, q) > kTol) continue;
      if (std::abs(cross(e, d)) > kTol * norm(e) * len) continue;
      const double elen = norm(e);
      const Point2 outward{e.y / elen, -e.x / elen};
      const Point2 probe = m + kProbeOffset * outward;
      if (!bounds.contains(probe, 0.0)) return true;
      for (const Polygon& other : env.obstacles()) {
        if (&other != &owner && other.contains_strictly(probe)) return true;
      }
    }
    return false;
  };

  std::vector<double> params;
  for (const Polygon& poly : env.obstacles()) {
    if (!boxes_overlap(poly.bounding_box(), seg_box, kTol)) continue;
    params.assign({0.0, 1.0});
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 p = poly.vertex(i);
      const Point2 q = poly.vertex(i + 1);
      const Point2 e = q - p;
      const double elen = norm(e);
      const Point2 w = p - a;
      const double denom = cross(d, e);
      if (std::abs(denom) > kTol * len * elen) {
        const double t = cross(w, e) / denom;
        const double u = cross(w, d) / denom;
        const double u_tol = kTol / elen;
        if (u >= -u_tol && u <= 1.0 + u_tol && t > 0.0 && t < 1.0) params.push_back(t);
      } else if (std::abs(cross(w, d)) <= kTol * len) {
        for (double t : {dot(w, d) / len2, dot(q - a, d) / len2}) {
          if (t > 0.0 && t < 1.0) params.push_back(t);
        }
      }
    }
    std::sort(params.begin(), params.end());
    for (std::size_t k = 0; k + 1 < params.size(); ++k) {
      if ((params[k + 1] - params[k]) * len <= kTol) continue;
      const Point2 m = a + (0.5 * (params[k] + params[k + 1])) * d;
      if (poly.contains_strictly(m)) return false;
      if (poly.on_boundary(m) && far_side_blocked(poly, m)) return false;
    }
  }
  return true;
}

// --- Robot shapes ----------------------------------------------------------------

std::size_t config_dimension(const RobotShape& shape) {
  return std::holds_alternative<Disc>(shape) ? 2 : 3;
}

double rotation_radius(const RobotShape& shape) {
  if (const auto* r = std::get_if<Rectangle>(&shape)) {
    return 0.5 * std::hypot(r->width, r->height);
  }
  return std::get<Disc>(shape).radius;
}

double wrap_angle(double theta) {
  double w = theta - 2.0 * kPi * std::floor((theta + kPi) / (2.0 * kPi));
  if (w >= kPi) w -= 2.0 * kPi;
  if (w < -kPi) w += 2.0 * kPi;
  return w;
}

double angular_difference(double a, double b) { return wrap_angle(b - a); }

std::vector<Point2> rectangle_corners(const Rectangle& rect, std::span<const double> pose) {
  const Point2 c = pose_point(pose);
  const double cs = std::cos(pose[2]);
  const double sn = std::sin(pose[2]);
  const double hw = 0.5 * rect.width;
  const double hh = 0.5 * rect.height;
  std::vector<Point2> out;
  out.reserve(4);
  for (auto [sx, sy] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}) {
    const double lx = sx * hw;
    const double ly = sy * hh;
    out.push_back({c.x + cs * lx - sn * ly, c.y + sn * lx + cs * ly});
  }
  return out;
}

bool shape_in_collision(const Environment& env, const RobotShape& shape,
                        std::span<const double> pose) {
  require_pose(shape, pose);
  const Box2& bounds = env.bounds();
  if (const auto* disc = std::get_if<Disc>(&shape)) {
    const Point2 c = pose_point(pose);
    const double r = disc->radius;
    if (c.x - r < bounds.lo.x - kTol || c.x + r > bounds.hi.x + kTol ||
        c.y - r < bounds.lo.y - kTol || c.y + r > bounds.hi.y + kTol) {
      return true;
    }
    for (const Polygon& poly : env.obstacles()) {
      if (disc_hits_polygon(poly, c, r)) return true;
    }
    return false;
  }
  const auto corners = rectangle_corners(std::get<Rectangle>(shape), pose);
  for (const Point2& p : corners) {
    if (!bounds.contains(p)) return true;
  }
  for (const Polygon& poly : env.obstacles()) {
    if (rectangle_hits_polygon(poly, corners)) return true;
  }
  return false;
}

bool shapes_overlap(const RobotShape& a, std::span<const double> pose_a, const RobotShape& b,
                    std::span<const double> pose_b) {
  require_pose(a, pose_a);
  require_pose(b, pose_b);
  const auto* da = std::get_if<Disc>(&a);
  const auto* db = std::get_if<Disc>(&b);
  if (da && db) {
    return distance(pose_point(pose_a), pose_point(pose_b)) < da->radius + db->radius - kTol;
  }
  if (da || db) {
    const double r = da ? da->radius : db->radius;
    const Point2 c = pose_point(da ? pose_a : pose_b);
    const auto corners = da ? rectangle_corners(std::get<Rectangle>(b), pose_b)
                            : rectangle_corners(std::get<Rectangle>(a), pose_a);
    if (convex_contains_strictly(corners, c)) return true;
    return polyline_loop_distance(corners, c) < r - kTol;
  }
  const auto ca = rectangle_corners(std::get<Rectangle>(a), pose_a);
  const auto cb = rectangle_corners(std::get<Rectangle>(b), pose_b);
  for (const auto* poly : {&ca, &cb}) {
    for (std::size_t i = 0; i < 4; ++i) {
      const Point2 e = (*poly)[(i + 1) % 4] - (*poly)[i];
      const Point2 axis{-e.y, e.x};
      const auto [alo, ahi] = project(ca, axis);
      const auto [blo, bhi] = project(cb, axis);
      if (std::min(ahi, bhi) - std::max(alo, blo) <= kTol * norm(axis)) return false;
    }
  }
  return true;
}

}  // namespace distplr
