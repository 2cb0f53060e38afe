#include "distplr/plr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include <Eigen/Dense>

#include "distplr/errors.hpp"

namespace distplr {

// --- Cell ------------------------------------------------------------------------

ConfigVector Cell::center() const {
  ConfigVector c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

double Cell::longest_edge() const {
  double edge = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) edge = std::max(edge, hi[i] - lo[i]);
  return edge;
}

bool Cell::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
  }
  return true;
}

Cell make_cell(ConfigVector lo, ConfigVector hi) {
  if (lo.empty() || lo.size() != hi.size()) {
    throw ContractViolation("cell bounds must be non-empty and of equal dimension");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i])) {
      throw ContractViolation("cell bounds must be finite with lo < hi");
    }
  }
  return Cell{std::move(lo), std::move(hi), 0};
}

Cell cell_from_bounds(const Box2& bounds) {
  return make_cell({bounds.lo.x, bounds.lo.y}, {bounds.hi.x, bounds.hi.y});
}

BuildParams BuildParams::defaults_for(const Cell& root) {
  double diag2 = 0.0;
  for (std::size_t i = 0; i < root.dimension(); ++i) {
    diag2 += (root.hi[i] - root.lo[i]) * (root.hi[i] - root.lo[i]);
  }
  BuildParams params;
  params.max_depth = 9;
  params.error_threshold = 0.01 * std::sqrt(diag2);
  return params;
}

// --- Fitting -------------------------------------------------------------------------

double Coefficients::evaluate(std::span<const double> x) const {
  if (x.size() + 1 != values.size()) {
    throw ContractViolation("coefficient/configuration dimension mismatch");
  }
  double v = values[0];
  for (std::size_t i = 0; i < x.size(); ++i) v += values[i + 1] * x[i];
  return v;
}

Coefficients compute_coefficients(std::span<const Sample> samples) {
  if (samples.empty()) throw ContractViolation("cannot fit coefficients to zero samples");
  const std::size_t n = samples.front().point.size();
  if (n == 0) throw ContractViolation("samples must have dimension >= 1");

  const auto rows = static_cast<Eigen::Index>(samples.size());
  const auto cols = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd values(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Sample& s = samples[static_cast<std::size_t>(r)];
    if (s.point.size() != n) throw ContractViolation("samples have inconsistent dimensions");
    if (!std::isfinite(s.value)) throw ContractViolation("sample value is not finite");
    design(r, 0) = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(s.point[j])) throw ContractViolation("sample point is not finite");
      design(r, static_cast<Eigen::Index>(j + 1)) = s.point[j];
    }
    values(r) = s.value;
  }

  const Eigen::VectorXd solution = design.completeOrthogonalDecomposition().solve(values);
  Coefficients c;
  c.values.assign(solution.data(), solution.data() + solution.size());
  return c;
}

std::vector<ConfigVector> base_points(const Cell& cell) {
  const std::size_t n = cell.dimension();
  const std::size_t corners = std::size_t{1} << n;
  std::vector<ConfigVector> points;
  points.reserve(corners + 1);
  for (std::size_t mask = 0; mask < corners; ++mask) {
    ConfigVector p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = (mask >> i) & 1U ? cell.hi[i] : cell.lo[i];
    points.push_back(std::move(p));
  }
  points.push_back(cell.center());
  return points;
}

namespace {

using ValueCache = std::map<ConfigVector, double>;

double cached_eval(const DistanceOracle& oracle, const ConfigVector& x, ValueCache* cache) {
  if (!cache) return oracle.evaluate(x);
  auto it = cache->find(x);
  if (it != cache->end()) return it->second;
  const double v = oracle.evaluate(x);
  cache->emplace(x, v);
  return v;
}

struct CellFit {
  LeafPayload payload;
  double center_value;
  bool mixed;  // some base point has no finite value
};

CellFit fit_cell_impl(const Cell& cell, const DistanceOracle& oracle, ValueCache* cache) {
  const auto points = base_points(cell);
  std::vector<Sample> finite;
  finite.reserve(points.size());
  double center_value = kInfinity;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double v = cached_eval(oracle, points[i], cache);
    if (i + 1 == points.size()) center_value = v;
    if (std::isfinite(v)) finite.push_back({points[i], v});
  }
  const bool mixed = finite.size() < points.size();
  if (finite.size() < cell.dimension() + 1) return {BlockedLeaf{}, center_value, mixed};
  return {compute_coefficients(finite), center_value, mixed};
}

bool should_split_given(const Cell& cell, const LeafPayload& leaf, double center_value,
                        bool mixed, const BuildParams& params) {
  if (cell.depth >= params.max_depth) return false;
  const auto* coeffs = std::get_if<Coefficients>(&leaf);
  if (!coeffs) return true;
  // A fit through fewer base points can be exact at the center while wrong elsewhere.
  if (mixed || !std::isfinite(center_value)) return true;
  const double error = std::abs(coeffs->evaluate(cell.center()) - center_value);
  return error > params.error_threshold;
}

void require_dimension(const Cell& cell, const DistanceOracle& oracle) {
  if (cell.dimension() != oracle.dimension()) {
    throw ContractViolation("cell dimension " + std::to_string(cell.dimension()) +
                            " does not match oracle dimension " +
                            std::to_string(oracle.dimension()));
  }
}

}  // namespace

LeafPayload fit_cell(const Cell& cell, const DistanceOracle& oracle) {
  require_dimension(cell, oracle);
  return fit_cell_impl(cell, oracle, nullptr).payload;
}

bool should_split(const Cell& cell, const LeafPayload& leaf, const DistanceOracle& oracle,
                  const BuildParams& params) {
  require_dimension(cell, oracle);
  if (cell.depth >= params.max_depth) return false;
  const CellFit fit = fit_cell_impl(cell, oracle, nullptr);
  return should_split_given(cell, leaf, fit.center_value, fit.mixed, params);
}

std::pair<Cell, Cell> split_cell(const Cell& cell) {
  const std::size_t axis = cell.split_axis();
  const double mid = 0.5 * (cell.lo[axis] + cell.hi[axis]);
  Cell left = cell;
  Cell right = cell;
  left.hi[axis] = mid;
  right.lo[axis] = mid;
  left.depth = right.depth = cell.depth + 1;
  return {std::move(left), std::move(right)};
}

// --- Tree ---------------------------------------------------------------------------

namespace {

// Validates the subtree rooted at `index`; returns the index one past it.
std::size_t validate_subtree(std::span<const PlrTree::Node> nodes, std::size_t pool_size,
                             std::size_t index, const Cell& cell) {
  if (index >= nodes.size()) throw ContractViolation("PLR node stream ends early");
  const PlrTree::Node& node = nodes[index];
  const std::size_t n = cell.dimension();
  switch (node.kind) {
    case NodeKind::leaf:
      if (std::size_t{node.payload} + n + 1 > pool_size) {
        throw ContractViolation("leaf coefficients out of range");
      }
      return index + 1;
    case NodeKind::blocked:
      return index + 1;
    case NodeKind::internal: {
      if (node.axis != cell.split_axis()) {
        throw ContractViolation("internal node axis must equal depth mod dimension");
      }
      if (!(node.split_value > cell.lo[node.axis] && node.split_value < cell.hi[node.axis])) {
        throw ContractViolation("split value must lie strictly inside the cell");
      }
      Cell left = cell;
      Cell right = cell;
      left.hi[node.axis] = node.split_value;
      right.lo[node.axis] = node.split_value;
      left.depth = right.depth = cell.depth + 1;
      const std::size_t after_left = validate_subtree(nodes, pool_size, index + 1, left);
      if (node.right != after_left) throw ContractViolation("right child index is not preorder");
      return validate_subtree(nodes, pool_size, after_left, right);
    }
  }
  throw ContractViolation("unknown PLR node kind");
}

}  // namespace

PlrTree::PlrTree(Cell root_cell, std::vector<Node> nodes, std::vector<double> coefficient_pool,
                 BuildParams params)
    : root_cell_(std::move(root_cell)),
      nodes_(std::move(nodes)),
      pool_(std::move(coefficient_pool)),
      params_(params) {
  root_cell_ = make_cell(root_cell_.lo, root_cell_.hi);
  if (validate_subtree(nodes_, pool_.size(), 0, root_cell_) != nodes_.size()) {
    throw ContractViolation("PLR node stream has unreachable nodes");
  }
  build_jump_table();
}

void PlrTree::build_jump_table() {
  constexpr std::size_t kMaxEntries = 4096;
  const std::size_t n = dimension();

  // Grow the number of levels while every node above them is internal and the table fits.
  std::vector<std::size_t> level{0};
  std::vector<std::vector<double>> bounds(n);
  std::size_t levels = 0;
  for (;;) {
    if (!std::all_of(level.begin(), level.end(),
                     [&](std::size_t i) { return nodes_[i].kind == NodeKind::internal; })) {
      break;
    }
    auto next_bounds = bounds;
    for (std::size_t i : level) next_bounds[nodes_[i].axis].push_back(nodes_[i].split_value);
    std::size_t entries = 1;
    for (auto& b : next_bounds) {
      std::sort(b.begin(), b.end());
      b.erase(std::unique(b.begin(), b.end()), b.end());
      entries *= b.size() + 1;
    }
    if (entries > kMaxEntries) break;
    bounds = std::move(next_bounds);
    std::vector<std::size_t> next;
    for (std::size_t i : level) {
      next.push_back(i + 1);
      next.push_back(nodes_[i].right);
    }
    level = std::move(next);
    ++levels;
  }

  jump_ = {};
  std::size_t entries = 1;
  for (std::size_t a = 0; a < n; ++a) {
    JumpAxis axis;
    axis.lo = root_cell_.lo[a];
    axis.hi = root_cell_.hi[a];
    axis.scale = static_cast<double>(bounds[a].size() + 1) / (axis.hi - axis.lo);
    axis.first = jump_.bounds.size();
    axis.count = bounds[a].size();
    axis.stride = entries;
    entries *= bounds[a].size() + 1;
    jump_.bounds.push_back(-kInfinity);
    jump_.bounds.insert(jump_.bounds.end(), bounds[a].begin(), bounds[a].end());
    jump_.bounds.push_back(kInfinity);
    jump_.axes.push_back(axis);
  }
  jump_.entry.resize(entries);
  ConfigVector rep(n);
  for (std::size_t idx = 0; idx < entries; ++idx) {
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t j = (idx / jump_.axes[a].stride) % (bounds[a].size() + 1);
      rep[a] = j == 0 ? root_cell_.lo[a] : bounds[a][j - 1];
    }
    std::size_t i = 0;
    for (std::size_t d = 0; d < levels; ++d) {
      const Node& nd = nodes_[i];
      i = rep[nd.axis] >= nd.split_value ? nd.right : i + 1;
    }
    jump_.entry[idx] = static_cast<std::uint32_t>(i);
  }
}

std::size_t PlrTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind != NodeKind::internal; }));
}

std::size_t PlrTree::blocked_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind == NodeKind::blocked; }));
}

std::size_t PlrTree::internal_count() const { return nodes_.size() - leaf_count(); }

std::vector<std::size_t> PlrTree::depth_histogram() const {
  std::vector<std::size_t> histogram;
  for_each_leaf([&](std::size_t, const Cell& cell) {
    if (histogram.size() <= cell.depth) histogram.resize(cell.depth + 1, 0);
    ++histogram[cell.depth];
  });
  return histogram;
}

PlrTree::Located PlrTree::locate(std::span<const double> x) const {
  if (x.size() != dimension()) {
    throw DomainError("query dimension " + std::to_string(x.size()) +
                      " does not match tree dimension " + std::to_string(dimension()));
  }
  if (!root_cell_.contains(x)) throw DomainError("query point lies outside the PLR root cell");
  Located out{0, root_cell_};
  while (nodes_[out.node].kind == NodeKind::internal) {
    const Node& node = nodes_[out.node];
    if (x[node.axis] >= node.split_value) {
      out.cell.lo[node.axis] = node.split_value;
      out.node = node.right;
    } else {
      out.cell.hi[node.axis] = node.split_value;
      out.node = out.node + 1;
    }
    ++out.cell.depth;
  }
  return out;
}

LeafPayload PlrTree::payload(std::size_t index) const {
  const Node& node = nodes_.at(index);
  switch (node.kind) {
    case NodeKind::leaf: {
      const auto first = pool_.begin() + node.payload;
      return Coefficients{{first, first + static_cast<std::ptrdiff_t>(dimension() + 1)}};
    }
    case NodeKind::blocked:
      return BlockedLeaf{};
    case NodeKind::internal:
      break;
  }
  throw ContractViolation("node " + std::to_string(index) + " is not a leaf");
}

// --- Construction ----------------------------------------------------------------------

PlrTree build_plr(const DistanceOracle& oracle, const Cell& root_cell, const BuildParams& params) {
  const Cell root = make_cell(root_cell.lo, root_cell.hi);
  require_dimension(root, oracle);
  if (root.dimension() > 255) throw ContractViolation("PLR dimension exceeds 255");

  struct WorkNode {
    Cell cell;
    LeafPayload payload;
    std::size_t left = 0;
    std::size_t right = 0;
    bool split = false;
  };
  std::vector<WorkNode> work;
  ValueCache cache;

  std::deque<std::size_t> queue;
  work.push_back({root, BlockedLeaf{}});
  queue.push_back(0);
  while (!queue.empty()) {
    const std::size_t id = queue.front();
    queue.pop_front();
    CellFit fit = fit_cell_impl(work[id].cell, oracle, &cache);
    work[id].payload = std::move(fit.payload);
    if (!should_split_given(work[id].cell, work[id].payload, fit.center_value, fit.mixed, params)) continue;

    auto [left, right] = split_cell(work[id].cell);
    work[id].split = true;
    work[id].left = work.size();
    work.push_back({std::move(left), BlockedLeaf{}});
    work[id].right = work.size();
    work.push_back({std::move(right), BlockedLeaf{}});
    queue.push_back(work[id].left);
    queue.push_back(work[id].right);
  }

  // Flatten into preorder.
  std::vector<PlrTree::Node> nodes;
  std::vector<double> pool;
  nodes.reserve(work.size());
  struct Pending {
    std::size_t work_id;
    std::size_t parent;  // node whose `right` should point here, or SIZE_MAX
  };
  std::vector<Pending> stack{{0, SIZE_MAX}};
  while (!stack.empty()) {
    const Pending item = stack.back();
    stack.pop_back();
    const WorkNode& w = work[item.work_id];
    const auto index = static_cast<std::uint32_t>(nodes.size());
    if (item.parent != SIZE_MAX) nodes[item.parent].right = index;

    PlrTree::Node node;
    if (w.split) {
      const std::size_t axis = w.cell.split_axis();
      node.kind = NodeKind::internal;
      node.axis = static_cast<std::uint8_t>(axis);
      node.split_value = work[w.left].cell.hi[axis];
      nodes.push_back(node);
      stack.push_back({w.right, index});
      stack.push_back({w.left, SIZE_MAX});
    } else if (const auto* c = std::get_if<Coefficients>(&w.payload)) {
      node.kind = NodeKind::leaf;
      node.payload = static_cast<std::uint32_t>(pool.size());
      pool.insert(pool.end(), c->values.begin(), c->values.end());
      nodes.push_back(node);
    } else {
      node.kind = NodeKind::blocked;
      nodes.push_back(node);
    }
  }
  return PlrTree(root, std::move(nodes), std::move(pool), params);
}

}  // namespace distplr
