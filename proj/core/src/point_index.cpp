#include "point_index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace distplr::detail {

namespace {

constexpr std::uint32_t kLeafSize = 8;

double box_distance_sq(const Box2& box, Point2 p) {
  const double dx = std::max({box.lo.x - p.x, 0.0, p.x - box.hi.x});
  const double dy = std::max({box.lo.y - p.y, 0.0, p.y - box.hi.y});
  return dx * dx + dy * dy;
}

}  // namespace

PointIndex::PointIndex(std::span<const Point2> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

std::int32_t PointIndex::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  Box2 box{points_[order_[begin]], points_[order_[begin]]};
  for (std::uint32_t i = begin; i < end; ++i) {
    const Point2 p = points_[order_[i]];
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  }
  nodes_[id].box = box;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  const bool split_x = depth % 2 == 0;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const Point2 pa = points_[a];
                     const Point2 pb = points_[b];
                     return split_x ? std::tie(pa.x, a) < std::tie(pb.x, b)
                                    : std::tie(pa.y, a) < std::tie(pb.y, b);
                   });
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void PointIndex::for_each_nearest(
    Point2 query, const std::function<bool(std::uint32_t, double)>& visit) const {
  if (nodes_.empty()) return;
  // (squared distance, is_point, id); points sort after boxes at equal distance.
  using Entry = std::tuple<double, bool, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  heap.emplace(box_distance_sq(nodes_[0].box, query), false, 0);
  while (!heap.empty()) {
    const auto [d2, is_point, id] = heap.top();
    heap.pop();
    if (is_point) {
      if (visit(id, std::sqrt(d2))) return;
      continue;
    }
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Point2 d = points_[order_[i]] - query;
        heap.emplace(dot(d, d), true, order_[i]);
      }
    } else {
      for (std::int32_t child : {node.left, node.right}) {
        heap.emplace(box_distance_sq(nodes_[child].box, query), false,
                     static_cast<std::uint32_t>(child));
      }
    }
  }
}

std::vector<std::uint32_t> PointIndex::k_nearest(Point2 query, std::size_t k,
                                                 std::uint32_t exclude) const {
  std::vector<std::uint32_t> out;
  if (k == 0) return out;
  out.reserve(k);
  for_each_nearest(query, [&](std::uint32_t id, double) {
    if (id != exclude) out.push_back(id);
    return out.size() >= k;
  });
  return out;
}

}  // namespace distplr::detail
