#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "distplr/errors.hpp"
#include "distplr/plr.hpp"

// PLR1 layout, little-endian:
//   "PLR1" | u8 version | u32 n | f64 lo[n] | f64 hi[n] | u32 node_count | nodes (preorder)
//   node: u8 tag; internal(0): u8 axis, f64 split; leaf(1): f64 c[n+1]; blocked(2): -

namespace distplr {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'R', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kMaxDepth = 4096;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void bytes(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ == in_.size(); }

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{in_[pos_++]} << (8 * i);
    return std::bit_cast<double>(bits);
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("truncated PLR1 data", pos_);
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

struct Decoder {
  Reader& reader;
  std::size_t dimension;
  std::size_t declared_nodes;
  std::vector<PlrTree::Node> nodes;
  std::vector<double> pool;

  void node(Cell& cell) {
    if (cell.depth > kMaxDepth) throw FormatError("PLR1 tree is too deep", reader.offset());
    if (nodes.size() >= declared_nodes) {
      throw FormatError("node stream exceeds declared node count", reader.offset());
    }
    const std::size_t tag_offset = reader.offset();
    const std::uint8_t tag = reader.u8();
    PlrTree::Node n;
    switch (tag) {
      case 0: {
        const std::size_t axis_offset = reader.offset();
        n.kind = NodeKind::internal;
        n.axis = reader.u8();
        if (n.axis != cell.split_axis()) {
          throw FormatError("internal node axis does not follow the depth cycle", axis_offset);
        }
        const std::size_t split_offset = reader.offset();
        n.split_value = reader.f64();
        if (!(n.split_value > cell.lo[n.axis] && n.split_value < cell.hi[n.axis])) {
          throw FormatError("split value outside its cell", split_offset);
        }
        const std::size_t index = nodes.size();
        nodes.push_back(n);

        const double lo = cell.lo[n.axis];
        const double hi = cell.hi[n.axis];
        ++cell.depth;
        cell.hi[n.axis] = n.split_value;
        node(cell);
        cell.hi[n.axis] = hi;
        nodes[index].right = static_cast<std::uint32_t>(nodes.size());
        cell.lo[n.axis] = n.split_value;
        node(cell);
        cell.lo[n.axis] = lo;
        --cell.depth;
        return;
      }
      case 1: {
        n.kind = NodeKind::leaf;
        n.payload = static_cast<std::uint32_t>(pool.size());
        for (std::size_t i = 0; i <= dimension; ++i) {
          const std::size_t at = reader.offset();
          const double c = reader.f64();
          if (!std::isfinite(c)) throw FormatError("non-finite leaf coefficient", at);
          pool.push_back(c);
        }
        nodes.push_back(n);
        return;
      }
      case 2:
        n.kind = NodeKind::blocked;
        nodes.push_back(n);
        return;
      default:
        throw FormatError("unknown node tag " + std::to_string(tag), tag_offset);
    }
  }
};

}  // namespace

std::vector<std::uint8_t> serialize(const PlrTree& tree) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u8(kVersion);
  const std::size_t n = tree.dimension();
  w.u32(static_cast<std::uint32_t>(n));
  for (double v : tree.root_cell().lo) w.f64(v);
  for (double v : tree.root_cell().hi) w.f64(v);
  w.u32(static_cast<std::uint32_t>(tree.node_count()));
  const auto pool = tree.coefficient_pool();
  for (const PlrTree::Node& node : tree.nodes()) {
    w.u8(static_cast<std::uint8_t>(node.kind));
    switch (node.kind) {
      case NodeKind::internal:
        w.u8(node.axis);
        w.f64(node.split_value);
        break;
      case NodeKind::leaf:
        for (std::size_t i = 0; i <= n; ++i) w.f64(pool[node.payload + i]);
        break;
      case NodeKind::blocked:
        break;
    }
  }
  return w.take();
}

PlrTree deserialize(std::span<const std::uint8_t> bytes,
                    std::optional<std::size_t> expected_dimension) {
  Reader r(bytes);
  for (char c : kMagic) {
    const std::size_t at = r.offset();
    if (r.u8() != static_cast<std::uint8_t>(c)) throw FormatError("bad PLR1 magic", at);
  }
  {
    const std::size_t at = r.offset();
    const std::uint8_t version = r.u8();
    if (version != kVersion) {
      throw FormatError("unsupported PLR1 version " + std::to_string(version), at);
    }
  }
  const std::size_t dim_offset = r.offset();
  const std::uint32_t n = r.u32();
  if (n == 0 || n > 255) throw FormatError("invalid dimension " + std::to_string(n), dim_offset);
  if (expected_dimension && *expected_dimension != n) {
    throw FormatError("dimension " + std::to_string(n) + " does not match expected " +
                          std::to_string(*expected_dimension),
                      dim_offset);
  }
  const std::size_t bounds_offset = r.offset();
  Cell root;
  root.lo.resize(n);
  root.hi.resize(n);
  for (auto& v : root.lo) v = r.f64();
  for (auto& v : root.hi) v = r.f64();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(root.lo[i]) || !std::isfinite(root.hi[i]) || !(root.lo[i] < root.hi[i])) {
      throw FormatError("invalid root bounds", bounds_offset);
    }
  }
  const std::size_t count_offset = r.offset();
  const std::uint32_t node_count = r.u32();
  if (node_count == 0) throw FormatError("empty node stream", count_offset);

  Decoder decoder{r, n, node_count, {}, {}};
  decoder.nodes.reserve(std::min<std::size_t>(node_count, bytes.size()));
  Cell cursor = root;
  decoder.node(cursor);
  if (decoder.nodes.size() != node_count) {
    throw FormatError("node count " + std::to_string(decoder.nodes.size()) +
                          " does not match declared " + std::to_string(node_count),
                      r.offset());
  }
  if (!r.at_end()) throw FormatError("trailing bytes after PLR1 node stream", r.offset());
  return PlrTree(std::move(root), std::move(decoder.nodes), std::move(decoder.pool));
}

void write_plr_file(const std::filesystem::path& path, const PlrTree& tree) {
  const auto bytes = serialize(tree);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

PlrTree read_plr_file(const std::filesystem::path& path,
                      std::optional<std::size_t> expected_dimension) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open PLR file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize(bytes, expected_dimension);
}

}  // namespace distplr
