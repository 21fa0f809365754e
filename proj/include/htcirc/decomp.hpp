#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "htcirc/structure.hpp"
#include "htcirc/tensor.hpp"

namespace htcirc {

/// Deterministic generator for one (seed, stream) pair. Streams let a single
/// experiment seed fan out into independent per-draw generators.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Symmetric CP form: A = sum_g weights[g] * v_g (x) v_g (x) ... (x) v_g.
struct CpParams {
  int order = 0;
  int mode_length = 0;
  std::vector<std::vector<double>> vectors;  // r0 vectors of length M
  std::vector<double> weights;               // r0 output weights

  int terms() const { return static_cast<int>(vectors.size()); }
  void validate() const;
};

struct CpShape {
  int order = 0;
  int mode_length = 0;
  int terms = 0;
};

/// Structure of a hierarchical decomposition: tree plus a channel width per
/// node. Leaves always carry `mode_length` channels (the standard basis).
struct HierarchicalShape {
  ModeTree tree;
  int mode_length = 0;
  std::vector<int> widths;  // indexed by node id

  /// Leaves get M, every internal node (root included) gets `width`.
  static HierarchicalShape uniform(ModeTree tree, int mode_length, int width);
  /// Internal nodes at height h (leaves are height 0) get widths_by_height[h-1].
  static HierarchicalShape by_height(ModeTree tree, int mode_length,
                                     const std::vector<int>& widths_by_height);

  void validate() const;
};

/// Hierarchical decomposition parameters.
///
/// For an internal node v with children c_1..c_k, mixing[v][i] is an
/// r_v x r_{c_i} matrix. Channel g of v is the (generalized) outer product
/// over i of sum_a mixing[v][i](g, a) * phi_{c_i}^a. The decomposition output
/// is sum_g output_weights[g] * phi_root^g.
struct HierarchicalParams {
  HierarchicalShape shape;
  std::vector<std::vector<Matrix>> mixing;  // empty for leaves
  std::vector<double> output_weights;       // length r_root

  const ModeTree& tree() const { return shape.tree; }
  int width(std::size_t node) const { return shape.widths.at(node); }
  void validate() const;
};

/// Two hierarchical decompositions run side by side. At every exchange node
/// (a mode set present in both trees, root excluded) the two sides' channels
/// are concatenated, left block first, and both parents mix from that pool:
/// the parent's mixing matrix for such a child has r_left + r_right columns.
/// The output is the sum of both sides' outputs.
struct MixedParams {
  HierarchicalParams left;
  HierarchicalParams right;
  std::vector<std::vector<Mode>> exchange;  // sorted mode sets

  void validate() const;
};

/// Mode sets (sorted) of the non-root nodes present in both trees.
std::vector<std::vector<Mode>> common_nodes(const ModeTree& a, const ModeTree& b,
                                            bool include_leaves = true);

DenseTensor cp_generate(const CpParams& p);
DenseTensor hierarchical_generate(const HierarchicalParams& p);
DenseTensor generalized_generate(const HierarchicalParams& p, const OperatorSpec& op);
DenseTensor mixed_generate(const MixedParams& p);

/// Deep rectifier parameters on the perfect binary tree reproducing the shallow
/// network sum_g weights[g] * P_p sigma(vectors[g][d_p]) under (relu, max):
/// level-1 nodes apply vectors[g] to both leaves, higher levels pass channel g
/// through unchanged. Requires a power-of-two order.
HierarchicalParams max_pooling_deep_equivalent(const CpParams& shallow);

/// i.i.d. standard normal parameters.
CpParams sample_cp_params(const CpShape& shape, std::uint64_t seed);
HierarchicalParams sample_hierarchical_params(const HierarchicalShape& shape, std::uint64_t seed);
MixedParams sample_mixed_params(const HierarchicalShape& left, const HierarchicalShape& right,
                                const std::vector<std::vector<Mode>>& exchange,
                                std::uint64_t seed);

}  // namespace htcirc
