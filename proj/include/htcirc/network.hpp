#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "htcirc/circuits.hpp"
#include "htcirc/decomp.hpp"
#include "htcirc/tensor.hpp"

namespace htcirc {

using BigInt = boost::multiprecision::cpp_int;

/// Tree-shaped tensor network of a hierarchical decomposition. Node ids are
/// mode-tree node ids and leaves are the terminals.
///
/// The edge between a node and its parent is weighted by the rank the mixing
/// matrix between them can carry, min(r_node, r_parent), with leaves counting
/// as width M. A node with three or more children is joined by a copy tensor
/// of size r_node, so the node itself can be cut at that weight.
struct TensorNetworkGraph {
  struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    std::uint64_t weight = 1;
  };

  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<std::size_t> terminals;  // terminals[m-1] is the node of mode m
  /// 0 when the node cannot be cut.
  std::vector<std::uint64_t> node_weights;

  std::size_t num_terminals() const { return terminals.size(); }
  /// Cut element ids: edges are 0..E-1, cuttable node v is E + v.
  std::size_t num_elements() const { return edges.size() + num_nodes; }
  bool cuttable(std::size_t node) const { return node_weights.at(node) > 0; }
  std::uint64_t element_weight(std::size_t element) const;

  /// Connected, terminals of degree 1, weights >= 1. Throws InvariantError.
  void validate() const;
};

TensorNetworkGraph build_tensor_network(const HierarchicalShape& shape);
/// Requires a non-overlapping schedule.
TensorNetworkGraph build_tensor_network(const Architecture& arch);

/// Hierarchical structure of a non-overlapping architecture.
HierarchicalShape architecture_shape(const Architecture& arch);

struct MinCut {
  BigInt value;
  std::vector<std::size_t> elements;  // sorted element ids
};

/// Minimum product of cut weights over element sets separating the terminals
/// of p.left() from those of p.right(). Ties are broken by fewest elements,
/// then by the lexicographically smallest sorted id list.
MinCut min_multiplicative_cut(const TensorNetworkGraph& g, const Partition& p);

/// True when removing `elements` disconnects every left terminal from every
/// right terminal.
bool separates(const TensorNetworkGraph& g, const Partition& p,
               const std::vector<std::size_t>& elements);

BigInt cut_value(const TensorNetworkGraph& g, const std::vector<std::size_t>& elements);

struct WidthAdvice {
  std::vector<int> widths;  // one per layer
  BigInt objective;         // min over targets of the min-cut
  std::vector<BigInt> target_cuts;
  std::size_t assignments_checked = 0;
};

/// Exhaustive search over per-layer widths (each >= 1, sum <= budget) of a
/// non-overlapping architecture, maximizing the smallest min-cut over the
/// target partitions. Ties go to the lexicographically smallest widths.
WidthAdvice width_advisor(const Architecture& base, const std::vector<Partition>& targets,
                          int budget);

}  // namespace htcirc
