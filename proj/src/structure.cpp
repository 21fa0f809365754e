#include "htcirc/structure.hpp"

#include <algorithm>
#include <set>

#include "htcirc/errors.hpp"

namespace htcirc {

bool is_power_of_two(long long n) { return n >= 1 && (n & (n - 1)) == 0; }

namespace {

int log2_exact(int n) {
  int k = 0;
  while ((1 << k) < n) ++k;
  return k;
}

}  // namespace

ModeTree ModeTree::leaf(Mode mode) {
  if (mode < 1) throw InvalidArgument("mode labels start at 1");
  ModeTree t;
  t.nodes_.push_back(Node{{mode}, {}, std::nullopt});
  return t;
}

ModeTree ModeTree::join(const std::vector<ModeTree>& children) {
  if (children.size() < 2) throw InvalidArgument("internal mode-tree nodes need >= 2 children");
  ModeTree t;
  std::vector<std::size_t> child_roots;
  std::vector<Mode> modes;
  for (const auto& c : children) {
    const std::size_t offset = t.nodes_.size();
    for (const auto& n : c.nodes_) {
      Node copy = n;
      for (auto& ch : copy.children) ch += offset;
      if (copy.parent) *copy.parent += offset;
      t.nodes_.push_back(std::move(copy));
    }
    child_roots.push_back(t.nodes_.size() - 1);
    modes.insert(modes.end(), c.nodes_.back().modes.begin(), c.nodes_.back().modes.end());
  }
  std::sort(modes.begin(), modes.end());
  if (std::adjacent_find(modes.begin(), modes.end()) != modes.end()) {
    throw InvalidArgument("children of a mode-tree node must cover disjoint modes");
  }
  const std::size_t root = t.nodes_.size();
  for (auto c : child_roots) t.nodes_[c].parent = root;
  t.nodes_.push_back(Node{std::move(modes), std::move(child_roots), std::nullopt});
  return t;
}

std::size_t ModeTree::leaf_of(Mode mode) const {
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].children.empty() && nodes_[k].modes.front() == mode) return k;
  }
  throw InvalidArgument("mode " + std::to_string(mode) + " is not a leaf of the tree");
}

std::optional<std::size_t> ModeTree::find(const std::vector<Mode>& modes) const {
  std::vector<Mode> key(modes);
  std::sort(key.begin(), key.end());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].modes == key) return k;
  }
  return std::nullopt;
}

std::vector<Mode> ModeTree::leaf_order(std::size_t id) const {
  const auto& n = nodes_.at(id);
  if (n.children.empty()) return n.modes;
  std::vector<Mode> out;
  for (auto c : n.children) {
    auto sub = leaf_order(c);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

int ModeTree::depth_of(std::size_t id) const {
  const auto& n = nodes_.at(id);
  int d = 0;
  for (auto c : n.children) d = std::max(d, depth_of(c) + 1);
  return d;
}

int ModeTree::depth() const { return depth_of(root()); }

void ModeTree::check_invariants() const {
  const std::size_t n = num_modes();
  std::vector<Mode> expect(n);
  for (std::size_t k = 0; k < n; ++k) expect[k] = static_cast<Mode>(k + 1);
  if (nodes_.back().modes != expect) {
    throw InvariantError("mode-tree root does not cover 1.." + std::to_string(n));
  }
  if (nodes_.back().parent) throw InvariantError("mode-tree root has a parent");
  std::size_t leaves = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& node = nodes_[k];
    if (node.children.empty()) {
      if (node.modes.size() != 1) throw InvariantError("mode-tree leaf covers more than one mode");
      ++leaves;
      continue;
    }
    if (node.children.size() < 2) throw InvariantError("internal node with a single child");
    std::vector<Mode> merged;
    for (auto c : node.children) {
      if (c >= k) throw InvariantError("mode-tree nodes are not in post-order");
      if (nodes_[c].parent != k) throw InvariantError("mode-tree parent link mismatch");
      merged.insert(merged.end(), nodes_[c].modes.begin(), nodes_[c].modes.end());
    }
    std::sort(merged.begin(), merged.end());
    if (std::adjacent_find(merged.begin(), merged.end()) != merged.end() || merged != node.modes) {
      throw InvariantError("mode-tree node is not the disjoint union of its children");
    }
  }
  if (leaves != n) throw InvariantError("mode-tree leaves do not biject onto the modes");
}

bool ModeTree::operator==(const ModeTree& other) const {
  auto family = [](const ModeTree& t) {
    std::vector<std::vector<Mode>> sets;
    for (const auto& n : t.nodes_) sets.push_back(n.modes);
    std::sort(sets.begin(), sets.end());
    return sets;
  };
  return family(*this) == family(other);
}

std::string ModeTree::to_string() const {
  auto rec = [this](auto&& self, std::size_t id) -> std::string {
    const auto& n = nodes_[id];
    if (n.children.empty()) return std::to_string(n.modes.front());
    std::string out = "(";
    for (std::size_t k = 0; k < n.children.size(); ++k) {
      if (k) out += ' ';
      out += self(self, n.children[k]);
    }
    return out + ")";
  };
  return rec(rec, root());
}

std::size_t PoolingLayer::window_size() const {
  std::size_t s = 0;
  for (const auto& w : windows) s = std::max(s, w.size());
  return s;
}

bool PoolingLayer::overlapping() const {
  std::set<int> seen;
  for (const auto& w : windows) {
    for (int p : w) {
      if (!seen.insert(p).second) return true;
    }
  }
  return false;
}

PoolingSchedule::PoolingSchedule(int spatial_size, std::vector<PoolingLayer> layers)
    : spatial_size_(spatial_size), layers_(std::move(layers)) {
  if (spatial_size_ < 1) throw InvalidArgument("schedule needs at least one position");
  std::size_t length = static_cast<std::size_t>(spatial_size_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l + 1);
    if (layer.windows.empty()) throw InvalidArgument(where + " has no windows");
    const std::size_t k = layer.windows.front().size();
    std::vector<int> cover(length + 1, 0);
    for (const auto& w : layer.windows) {
      if (w.size() != k || k < 1) {
        throw InvalidArgument(where + ": windows must share one nonzero size");
      }
      for (int p : w) {
        if (p < 1 || static_cast<std::size_t>(p) > length) {
          throw InvalidArgument(where + ": window index " + std::to_string(p) +
                                " outside 1.." + std::to_string(length));
        }
        ++cover[static_cast<std::size_t>(p)];
      }
    }
    for (std::size_t p = 1; p <= length; ++p) {
      if (cover[p] == 0) {
        throw InvalidArgument(where + ": position " + std::to_string(p) + " is never pooled");
      }
    }
    if (layer.overlapping() && layer.stride >= static_cast<int>(k)) {
      throw InvalidArgument(where + ": overlapping windows need stride < window size");
    }
    length = layer.windows.size();
  }
  if (length != 1) {
    throw InvalidArgument("schedule must reduce to a single position, ends with " +
                          std::to_string(length));
  }
}

std::size_t PoolingSchedule::input_length(std::size_t layer) const {
  if (layer >= layers_.size()) throw InvalidArgument("layer index out of range");
  return layer == 0 ? static_cast<std::size_t>(spatial_size_) : layers_[layer - 1].windows.size();
}

bool PoolingSchedule::has_overlaps() const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [](const PoolingLayer& l) { return l.overlapping(); });
}

PoolingSchedule PoolingSchedule::contiguous(int spatial_size, int window, int stride) {
  if (window < 1 || stride < 1 || stride > window) {
    throw InvalidArgument("contiguous schedule needs 1 <= stride <= window");
  }
  std::vector<PoolingLayer> layers;
  int length = spatial_size;
  while (length > 1) {
    if (length < window || (length - window) % stride != 0) {
      throw InvalidArgument("length " + std::to_string(length) + " does not tile with window " +
                            std::to_string(window) + " and stride " + std::to_string(stride));
    }
    PoolingLayer layer;
    layer.stride = stride;
    for (int start = 1; start + window - 1 <= length; start += stride) {
      std::vector<int> w(static_cast<std::size_t>(window));
      for (int k = 0; k < window; ++k) w[static_cast<std::size_t>(k)] = start + k;
      layer.windows.push_back(std::move(w));
    }
    length = static_cast<int>(layer.windows.size());
    layers.push_back(std::move(layer));
  }
  return PoolingSchedule(spatial_size, std::move(layers));
}

PoolingSchedule PoolingSchedule::baseline(int spatial_size) {
  if (!is_power_of_two(spatial_size) || spatial_size < 2) {
    throw InvalidArgument("baseline schedule needs a power-of-two size >= 2, got " +
                          std::to_string(spatial_size));
  }
  return contiguous(spatial_size, 2, 2);
}

PoolingSchedule PoolingSchedule::overlapping(int spatial_size, int window) {
  return contiguous(spatial_size, window, 1);
}

PoolingSchedule PoolingSchedule::global(int spatial_size) {
  return contiguous(spatial_size, spatial_size, spatial_size);
}

ModeTree perfect_binary_tree(int num_modes) {
  if (!is_power_of_two(num_modes) || num_modes < 2) {
    throw InvalidArgument("perfect binary tree needs N = 2^k with k >= 1, got " +
                          std::to_string(num_modes));
  }
  std::vector<ModeTree> level;
  for (Mode m = 1; m <= num_modes; ++m) level.push_back(ModeTree::leaf(m));
  while (level.size() > 1) {
    std::vector<ModeTree> next;
    for (std::size_t k = 0; k < level.size(); k += 2) {
      next.push_back(ModeTree::join({level[k], level[k + 1]}));
    }
    level = std::move(next);
  }
  return level.front();
}

ModeTree tree_from_schedule(const PoolingSchedule& schedule) {
  std::vector<ModeTree> positions;
  for (Mode m = 1; m <= schedule.spatial_size(); ++m) positions.push_back(ModeTree::leaf(m));
  for (std::size_t l = 0; l < schedule.num_layers(); ++l) {
    const auto& layer = schedule.layer(l);
    if (layer.overlapping()) {
      throw InvalidArgument("layer " + std::to_string(l + 1) +
                            " overlaps; overlapping schedules have no single mode tree");
    }
    std::vector<ModeTree> next;
    for (const auto& w : layer.windows) {
      if (w.size() < 2) {
        throw InvalidArgument("layer " + std::to_string(l + 1) +
                              " has a size-1 window; mode-tree nodes need >= 2 children");
      }
      std::vector<ModeTree> kids;
      for (int p : w) kids.push_back(positions[static_cast<std::size_t>(p - 1)]);
      next.push_back(ModeTree::join(kids));
    }
    positions = std::move(next);
  }
  return positions.front();
}

std::vector<int> baseline_dilation_order(int num_modes) {
  if (!is_power_of_two(num_modes) || num_modes < 2) {
    throw InvalidArgument("dilation trees need N = 2^k with k >= 1");
  }
  std::vector<int> order(static_cast<std::size_t>(log2_exact(num_modes)));
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  return order;
}

ModeTree dilation_tree(int num_modes, const std::vector<int>& pairing_order) {
  const auto base = baseline_dilation_order(num_modes);
  std::vector<int> sorted(pairing_order);
  std::sort(sorted.begin(), sorted.end());
  if (sorted != base) {
    throw InvalidArgument("pairing order must be a permutation of 0.." +
                          std::to_string(base.size() - 1));
  }
  // groups keyed by the position bits not yet merged
  std::vector<ModeTree> groups;
  std::vector<int> keys;
  for (int p = 0; p < num_modes; ++p) {
    groups.push_back(ModeTree::leaf(p + 1));
    keys.push_back(p);
  }
  int merged_mask = 0;
  for (int bit : pairing_order) {
    merged_mask |= 1 << bit;
    std::vector<ModeTree> next;
    std::vector<int> next_keys;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (keys[g] & (1 << bit)) continue;
      const int partner_key = keys[g] | (1 << bit);
      const auto it = std::find(keys.begin(), keys.end(), partner_key);
      next.push_back(ModeTree::join({groups[g], groups[static_cast<std::size_t>(it - keys.begin())]}));
      next_keys.push_back(keys[g] & ~merged_mask);
    }
    groups = std::move(next);
    keys = std::move(next_keys);
  }
  return groups.front();
}

std::string CanonicalPartition::to_string() const {
  switch (kind) {
    case PartitionKind::even_odd: return "even_odd";
    case PartitionKind::contiguous_halves: return "contiguous_halves";
    case PartitionKind::window_splitting:
      return "window_splitting(" + std::to_string(layer) + ")";
    case PartitionKind::custom: {
      std::string out = "custom{";
      for (std::size_t k = 0; k < left.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(left[k]);
      }
      return out + "}";
    }
  }
  return "?";
}

Partition resolve_partition(const CanonicalPartition& kind, int num_modes,
                            const std::optional<PoolingSchedule>& schedule) {
  if (num_modes < 2) throw InvalidArgument("partitions need at least two modes");
  const auto n = static_cast<std::size_t>(num_modes);
  switch (kind.kind) {
    case PartitionKind::even_odd: {
      if (num_modes % 2) throw InvalidArgument("even_odd partition needs even N");
      std::vector<Mode> left;
      for (Mode m = 1; m <= num_modes; m += 2) left.push_back(m);
      return Partition(n, left);
    }
    case PartitionKind::contiguous_halves: {
      if (num_modes % 2) throw InvalidArgument("contiguous_halves partition needs even N");
      std::vector<Mode> left;
      for (Mode m = 1; m <= num_modes / 2; ++m) left.push_back(m);
      return Partition(n, left);
    }
    case PartitionKind::window_splitting: {
      const PoolingSchedule sched = schedule ? *schedule : PoolingSchedule::baseline(num_modes);
      if (sched.spatial_size() != num_modes) {
        throw InvalidArgument("schedule size does not match N");
      }
      if (kind.layer < 1 || static_cast<std::size_t>(kind.layer) > sched.num_layers()) {
        throw InvalidArgument("window_splitting layer " + std::to_string(kind.layer) +
                              " outside 1.." + std::to_string(sched.num_layers()));
      }
      // modes covered by each position at the input of the requested layer
      std::vector<std::vector<Mode>> cover;
      for (Mode m = 1; m <= num_modes; ++m) cover.push_back({m});
      for (int l = 0; l + 1 < kind.layer; ++l) {
        const auto& layer = sched.layer(static_cast<std::size_t>(l));
        if (layer.overlapping()) {
          throw InvalidArgument("window_splitting needs non-overlapping layers below the target");
        }
        std::vector<std::vector<Mode>> next;
        for (const auto& w : layer.windows) {
          std::vector<Mode> merged;
          for (int p : w) {
            const auto& c = cover[static_cast<std::size_t>(p - 1)];
            merged.insert(merged.end(), c.begin(), c.end());
          }
          next.push_back(std::move(merged));
        }
        cover = std::move(next);
      }
      const auto& layer = sched.layer(static_cast<std::size_t>(kind.layer - 1));
      if (layer.overlapping()) throw InvalidArgument("window_splitting target layer overlaps");
      std::vector<Mode> left;
      for (const auto& w : layer.windows) {
        if (w.size() < 2) throw InvalidArgument("cannot split a size-1 window");
        const int first = *std::min_element(w.begin(), w.end());
        const auto& c = cover[static_cast<std::size_t>(first - 1)];
        left.insert(left.end(), c.begin(), c.end());
      }
      return Partition(n, left);
    }
    case PartitionKind::custom: return Partition(n, kind.left);
  }
  throw InvalidArgument("unknown partition kind");
}

}  // namespace htcirc
