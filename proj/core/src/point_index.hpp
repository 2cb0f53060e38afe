#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "distplr/geometry.hpp"

namespace distplr::detail {

/// Static 2-D kd-tree with best-first nearest-neighbor enumeration.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Point2> points);

  /// Calls `visit(index, distance)` in nondecreasing distance order until it returns true.
  void for_each_nearest(Point2 query,
                        const std::function<bool(std::uint32_t, double)>& visit) const;

  /// The k closest points to `query`, nearest first, skipping `exclude`.
  std::vector<std::uint32_t> k_nearest(Point2 query, std::size_t k,
                                       std::uint32_t exclude = UINT32_MAX) const;

 private:
  struct Node {
    Box2 box;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);

  std::vector<Point2> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace distplr::detail
