#pragma once

#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "distplr/errors.hpp"
#include "distplr/geometry.hpp"
#include "distplr/oracles.hpp"

namespace distplr {

/// Axis-aligned box of the partition. Children split along (parent axis + 1) mod n,
/// so the split axis is a function of depth.
struct Cell {
  ConfigVector lo;
  ConfigVector hi;
  std::size_t depth = 0;

  std::size_t dimension() const noexcept { return lo.size(); }
  std::size_t split_axis() const noexcept { return depth % lo.size(); }
  ConfigVector center() const;
  double longest_edge() const;
  /// Closed containment.
  bool contains(std::span<const double> x) const;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Validated root cell (lo < hi componentwise, finite, n >= 1).
Cell make_cell(ConfigVector lo, ConfigVector hi);
Cell cell_from_bounds(const Box2& bounds);

enum class SampleScheme : std::uint8_t { corners_plus_center };

struct BuildParams {
  std::size_t max_depth = 9;
  double error_threshold = 0.0;  // z
  SampleScheme scheme = SampleScheme::corners_plus_center;

  /// max_depth 9 and z = 1% of the root cell diagonal.
  static BuildParams defaults_for(const Cell& root);
};

/// Affine model [bias, c_1 ... c_n]; estimate = bias + sum c_i x_i.
struct Coefficients {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double evaluate(std::span<const double> x) const;

  friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

struct BlockedLeaf {
  friend bool operator==(BlockedLeaf, BlockedLeaf) = default;
};

using LeafPayload = std::variant<Coefficients, BlockedLeaf>;

struct Sample {
  ConfigVector point;
  double value = 0.0;
};

/// Least-squares affine fit; minimum-norm solution when rank deficient.
/// Throws ContractViolation on empty input, ragged dimensions, or non-finite values.
Coefficients compute_coefficients(std::span<const Sample> samples);

/// The 2^n corners (bit i of the corner index picks hi on axis i) followed by the center.
std::vector<ConfigVector> base_points(const Cell& cell);

/// Fits the cell from the finite oracle values at its base points; BlockedLeaf when fewer
/// than n+1 survive.
LeafPayload fit_cell(const Cell& cell, const DistanceOracle& oracle);

/// Splits below max_depth when the leaf is blocked, any base point is unreachable, or the
/// center error exceeds the threshold.
bool should_split(const Cell& cell, const LeafPayload& leaf, const DistanceOracle& oracle,
                  const BuildParams& params);

/// Halves the cell at the midpoint of its split axis.
std::pair<Cell, Cell> split_cell(const Cell& cell);

enum class NodeKind : std::uint8_t { internal = 0, leaf = 1, blocked = 2 };

class PlrTree {
 public:
  /// Nodes are stored in preorder: an internal node's left child directly follows it.
  struct Node {
    NodeKind kind = NodeKind::leaf;
    std::uint8_t axis = 0;
    double split_value = 0.0;
    std::uint32_t right = 0;    // internal only
    std::uint32_t payload = 0;  // leaf only: offset into the coefficient pool

    friend bool operator==(const Node&, const Node&) = default;
  };

  struct Located {
    std::size_t node = 0;
    Cell cell;
  };

  /// Validates the preorder layout; throws ContractViolation if inconsistent.
  PlrTree(Cell root_cell, std::vector<Node> nodes, std::vector<double> coefficient_pool,
          BuildParams params = {});

  std::size_t dimension() const noexcept { return root_cell_.dimension(); }
  const Cell& root_cell() const noexcept { return root_cell_; }
  const BuildParams& params() const noexcept { return params_; }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const double> coefficient_pool() const noexcept { return pool_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::size_t blocked_count() const;
  std::size_t internal_count() const;
  /// Number of leaves (blocked included) at each depth.
  std::vector<std::size_t> depth_histogram() const;

  /// Leaf containing x; ties on a split plane go right. Throws DomainError outside the root.
  Located locate(std::span<const double> x) const;

  /// c . [1 x] for the containing leaf, +inf in a blocked leaf. Not clamped.
  double query(std::span<const double> x) const;

  LeafPayload payload(std::size_t node) const;

  /// Calls fn(node_index, cell) for every leaf in preorder.
  template <typename Fn>
  void for_each_leaf(Fn&& fn) const;

  friend bool operator==(const PlrTree& a, const PlrTree& b) {
    return a.root_cell_ == b.root_cell_ && a.nodes_ == b.nodes_ && a.pool_ == b.pool_;
  }

 private:
  // Point location shortcut for the complete top levels: the split values there cut each
  // axis into intervals, and every grid cell of those intervals maps to one subtree.
  struct JumpAxis {
    double lo = 0.0;
    double hi = 0.0;
    double scale = 0.0;        // intervals per unit length
    std::size_t first = 0;     // bounds[first] = -inf, then count split values, then +inf
    std::size_t count = 0;
    std::size_t stride = 0;
  };
  struct JumpTable {
    std::vector<JumpAxis> axes;
    std::vector<double> bounds;  // per axis: sentinel, sorted distinct split values, sentinel
    std::vector<std::uint32_t> entry;
  };
  void build_jump_table();
  // N == 0 selects the runtime-dimension loop.
  template <std::size_t N>
  double query_kernel(const double* x, std::size_t n) const;

  Cell root_cell_;
  std::vector<Node> nodes_;
  std::vector<double> pool_;
  BuildParams params_;
  JumpTable jump_;
};

template <std::size_t N>
inline double PlrTree::query_kernel(const double* x, std::size_t n) const {
  if constexpr (N != 0) n = N;
  std::size_t cell = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const JumpAxis& ax = jump_.axes[a];
    const double xa = x[a];
    if (!(xa >= ax.lo && xa <= ax.hi)) {
      throw DomainError("query point lies outside the PLR root cell");
    }
    // Interval j spans [b[j], b[j+1]); arithmetic guess, then exact correction.
    const double* b = jump_.bounds.data() + ax.first;
    std::size_t j = std::min(ax.count, static_cast<std::size_t>((xa - ax.lo) * ax.scale));
    while (xa >= b[j + 1]) ++j;
    while (xa < b[j]) --j;
    cell += j * ax.stride;
  }
  // Branch-free child selection below the table; random queries defeat the predictor.
  const Node* nodes = nodes_.data();
  std::size_t i = jump_.entry[cell];
  while (nodes[i].kind == NodeKind::internal) {
    const Node& nd = nodes[i];
    const std::size_t go_right = x[nd.axis] >= nd.split_value;
    i = (i + 1) + go_right * (nd.right - (i + 1));
  }
  if (nodes[i].kind == NodeKind::blocked) return kInfinity;
  const double* c = pool_.data() + nodes[i].payload;
  double v = c[0];
  for (std::size_t k = 0; k < n; ++k) v += c[k + 1] * x[k];
  return v;
}

inline double PlrTree::query(std::span<const double> x) const {
  const std::size_t n = dimension();
  if (x.size() != n) throw DomainError("query dimension does not match tree dimension");
  switch (x.size()) {
    case 1:
      return query_kernel<1>(x.data(), n);
    case 2:
      return query_kernel<2>(x.data(), n);
    case 3:
      return query_kernel<3>(x.data(), n);
    default:
      return query_kernel<0>(x.data(), n);
  }
}

/// Worklist construction: fit each cell, split it while should_split says so.
PlrTree build_plr(const DistanceOracle& oracle, const Cell& root_cell, const BuildParams& params);

// --- PLR1 binary format ----------------------------------------------------------

std::vector<std::uint8_t> serialize(const PlrTree& tree);

/// Throws FormatError (with byte offset) on bad magic/version, truncation, trailing bytes,
/// inconsistent nodes, or a dimension other than `expected_dimension`.
PlrTree deserialize(std::span<const std::uint8_t> bytes,
                    std::optional<std::size_t> expected_dimension = std::nullopt);

void write_plr_file(const std::filesystem::path& path, const PlrTree& tree);
PlrTree read_plr_file(const std::filesystem::path& path,
                      std::optional<std::size_t> expected_dimension = std::nullopt);

// --- template implementation ---------------------------------------------------------

template <typename Fn>
void PlrTree::for_each_leaf(Fn&& fn) const {
  struct Frame {
    std::size_t node;
    Cell cell;
  };
  std::vector<Frame> stack;
  stack.push_back({0, root_cell_});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const Node& node = nodes_[frame.node];
    if (node.kind != NodeKind::internal) {
      fn(frame.node, frame.cell);
      continue;
    }
    Cell left = frame.cell;
    Cell right = frame.cell;
    left.hi[node.axis] = node.split_value;
    right.lo[node.axis] = node.split_value;
    left.depth = right.depth = frame.cell.depth + 1;
    stack.push_back({node.right, std::move(right)});
    stack.push_back({frame.node + 1, std::move(left)});
  }
}

}  // namespace distplr
