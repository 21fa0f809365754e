#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "htcirc/decomp.hpp"
#include "htcirc/structure.hpp"
#include "htcirc/tensor.hpp"

namespace htcirc {

inline constexpr std::uint64_t kDefaultGridGuard = 10'000'000;

enum class Representation { one_hot_grid, table };
/// shared: one kernel per layer. per_position: one kernel per output position.
enum class WeightSharing { shared, per_position };
/// pointwise: a single 1x1 kernel applied at every window position.
/// generalized: a separate kernel per window offset.
enum class ConvKind { pointwise, generalized };

std::string to_string(Representation r);
std::string to_string(WeightSharing s);
std::string to_string(ConvKind k);
Representation representation_from_string(const std::string& s);
WeightSharing sharing_from_string(const std::string& s);
ConvKind conv_kind_from_string(const std::string& s);

/// Grid points d/M for d = 1..M.
std::vector<double> input_grid(int grid_size);

/// Everything about a circuit except its trained values.
struct Architecture {
  int positions = 0;  // N
  int grid_size = 0;  // M
  Representation representation = Representation::one_hot_grid;
  PoolingSchedule schedule = PoolingSchedule::global(1);
  std::vector<int> widths;  // output channels of each layer
  OperatorSpec op;
  WeightSharing sharing = WeightSharing::shared;
  ConvKind conv = ConvKind::pointwise;

  int input_width(std::size_t layer) const;
  std::size_t slots(std::size_t layer) const;
  std::size_t offsets(std::size_t layer) const;
  void validate() const;
};

/// A concrete circuit. Layer k maps the previous layer's values x to
///   out[q] = P_{j} sigma( conv[k][slot(q)][offset(j)] * x[window_q[j]] )
/// and the output is output_weights . value at the single final position.
struct CircuitSpec {
  Architecture arch;
  /// table[d-1] holds the M representation values at grid point d (table mode only).
  std::vector<std::vector<double>> table;
  /// conv[layer][slot][offset] is widths[layer] x input_width(layer).
  std::vector<std::vector<std::vector<Matrix>>> conv;
  std::vector<double> output_weights;

  void validate() const;
};

/// i.i.d. standard normal weights for `arch`. A table representation also gets
/// a random table.
CircuitSpec sample_circuit(const Architecture& arch, std::uint64_t seed);

/// Baseline deep architecture: size-2 non-overlapping windows, uniform width.
Architecture deep_architecture(int positions, int grid_size, int width,
                               OperatorSpec op = OperatorSpec::arithmetic());
/// One global pooling window after a single 1x1 layer of r0 channels.
Architecture shallow_architecture(int positions, int grid_size, int r0,
                                  OperatorSpec op = OperatorSpec::arithmetic());
/// Stride-1 windows of size `window` with per-offset, per-position kernels.
Architecture overlapping_architecture(int positions, int grid_size, int window, int width,
                                      OperatorSpec op = OperatorSpec::arithmetic());

/// `grid_indices` are 1-based grid point indices, one per position.
double forward_eval(const CircuitSpec& c, const std::vector<int>& grid_indices);

/// Throws GuardError when M^N exceeds `guard`.
DenseTensor grid_tensor(const CircuitSpec& c, std::uint64_t guard = kDefaultGridGuard);

/// Throws GuardError when M^N exceeds `guard`; otherwise returns M^N.
std::uint64_t check_grid_guard(int positions, int grid_size, std::uint64_t guard);

/// Mode sets covered by each output position of each layer.
std::vector<std::vector<std::vector<Mode>>> schedule_coverage(const PoolingSchedule& schedule);

HierarchicalParams map_to_decomposition(const CircuitSpec& c);
/// Requires a shallow circuit: one global window, pointwise shared kernel.
CpParams map_to_cp(const CircuitSpec& c);

/// Shallow circuit whose channel g reads vectors[g] and whose output layer is
/// `weights`.
CircuitSpec shallow_circuit(const CpParams& p, OperatorSpec op = OperatorSpec::arithmetic());

/// Re-expresses a non-overlapping arithmetic decomposition over a binary tree of
/// contiguous intervals as a stride-1, size-2 overlapping circuit with
/// per-position kernels. Channel 0 of every layer carries the constant 1; the
/// remaining weights either route the original kernels or are zero.
CircuitSpec embed_in_overlapping(const HierarchicalParams& p);

}  // namespace htcirc
