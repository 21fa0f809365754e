#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "htcirc/tensor.hpp"

namespace htcirc {

/// Rooted tree whose leaves biject onto the modes 1..N. Every internal node has
/// at least two children and covers the disjoint union of its children's modes.
///
/// Nodes are stored in post-order: children precede their parent and the root
/// is the last node. Children keep the order they were joined in, which fixes
/// the mode order of intermediate tensors during generation.
class ModeTree {
 public:
  struct Node {
    std::vector<Mode> modes;  // sorted ascending
    std::vector<std::size_t> children;
    std::optional<std::size_t> parent;
  };

  static ModeTree leaf(Mode mode);
  static ModeTree join(const std::vector<ModeTree>& children);

  std::size_t num_modes() const { return nodes_.back().modes.size(); }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t root() const { return nodes_.size() - 1; }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }

  bool is_leaf(std::size_t id) const { return nodes_.at(id).children.empty(); }
  std::size_t leaf_of(Mode mode) const;
  std::optional<std::size_t> find(const std::vector<Mode>& modes) const;

  /// Leaf modes in the left-to-right order induced by child order.
  std::vector<Mode> leaf_order(std::size_t id) const;

  /// Number of edges on the longest root-to-leaf path.
  int depth() const;
  int depth_of(std::size_t id) const;

  /// Recursively asserts the disjoint-union invariant; throws InvariantError.
  void check_invariants() const;

  /// Trees are equal when they have the same node mode sets; child order is
  /// not significant.
  bool operator==(const ModeTree& other) const;

  std::string to_string() const;

 private:
  ModeTree() = default;
  std::vector<Node> nodes_;
};

/// One layer of window pooling. Windows list positions (1-based) of the layer's
/// input; output position k is produced by windows[k].
struct PoolingLayer {
  std::vector<std::vector<int>> windows;
  int stride = 0;

  std::size_t window_size() const;
  /// True when some input position is read by more than one window.
  bool overlapping() const;
  bool operator==(const PoolingLayer&) const = default;
};

/// Sequence of pooling layers over `spatial_size` input positions that ends
/// with a single position. Geometry is expressed only through window index
/// sets; 2-D layouts are flattened by the caller.
class PoolingSchedule {
 public:
  PoolingSchedule(int spatial_size, std::vector<PoolingLayer> layers);

  /// Windows of `window` consecutive positions advancing by `stride`, repeated
  /// until one position remains. Requires (length - window) % stride == 0 at
  /// every layer.
  static PoolingSchedule contiguous(int spatial_size, int window, int stride);
  /// Size-2 non-overlapping windows (spatial_size must be a power of two).
  static PoolingSchedule baseline(int spatial_size);
  /// Stride-1 windows of the given size, no padding.
  static PoolingSchedule overlapping(int spatial_size, int window);
  /// A single window covering all positions.
  static PoolingSchedule global(int spatial_size);

  int spatial_size() const { return spatial_size_; }
  std::size_t num_layers() const { return layers_.size(); }
  const PoolingLayer& layer(std::size_t k) const { return layers_.at(k); }
  const std::vector<PoolingLayer>& layers() const { return layers_; }

  std::size_t input_length(std::size_t layer) const;
  std::size_t output_length(std::size_t layer) const { return layers_.at(layer).windows.size(); }
  bool has_overlaps() const;

  bool operator==(const PoolingSchedule&) const = default;

 private:
  int spatial_size_;
  std::vector<PoolingLayer> layers_;
};

/// Perfect binary tree over modes 1..N with leaves in order (N a power of two).
ModeTree perfect_binary_tree(int num_modes);

/// Mode tree of a non-overlapping schedule: one internal node per window.
ModeTree tree_from_schedule(const PoolingSchedule& schedule);

/// Binary tree whose level-l nodes join groups that differ only in bit
/// `pairing_order[l-1]` of the 0-based position. The identity order
/// {0, 1, ..., k-1} pairs neighbours first and reproduces perfect_binary_tree.
ModeTree dilation_tree(int num_modes, const std::vector<int>& pairing_order);

std::vector<int> baseline_dilation_order(int num_modes);

enum class PartitionKind { even_odd, contiguous_halves, window_splitting, custom };

struct CanonicalPartition {
  PartitionKind kind = PartitionKind::even_odd;
  /// 1-based layer index for window_splitting.
  int layer = 1;
  /// Explicit I for custom.
  std::vector<Mode> left;

  static CanonicalPartition even_odd() { return {PartitionKind::even_odd, 1, {}}; }
  static CanonicalPartition contiguous_halves() { return {PartitionKind::contiguous_halves, 1, {}}; }
  static CanonicalPartition window_splitting(int layer) {
    return {PartitionKind::window_splitting, layer, {}};
  }
  static CanonicalPartition custom(std::vector<Mode> left) {
    return {PartitionKind::custom, 1, std::move(left)};
  }

  std::string to_string() const;
};

/// even_odd: I = odd modes. contiguous_halves: I = {1..N/2}.
/// window_splitting(l): for every window of layer l, I takes the modes under
/// the window's first position, so each window straddles the partition.
/// `schedule` defaults to the baseline size-2 schedule for window_splitting.
Partition resolve_partition(const CanonicalPartition& kind, int num_modes,
                            const std::optional<PoolingSchedule>& schedule = std::nullopt);

bool is_power_of_two(long long n);

}  // namespace htcirc
