#pragma once

#include <string>

#include <json.hpp>

#include "htcirc/analysis.hpp"
#include "htcirc/circuits.hpp"
#include "htcirc/decomp.hpp"
#include "htcirc/network.hpp"
#include "htcirc/structure.hpp"
#include "htcirc/tensor.hpp"

namespace htcirc {

/// Insertion-ordered so that serialized reports are byte-stable.
using Json = nlohmann::ordered_json;

/// {"order", "mode_lengths", "entries"} with entries in row-major order.
Json to_json(const DenseTensor& t);
DenseTensor tensor_from_json(const Json& j);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& field);

/// {"modes": [...], "children": [...]}; a leaf has one mode and no children.
/// tree_from_json also accepts "baseline" and {"dilation": [bit order]} when
/// the number of modes is known.
Json to_json(const ModeTree& tree);
ModeTree tree_from_json(const Json& j, int num_modes = 0);

Json to_json(const PoolingSchedule& s);
/// Accepts "baseline", "global", {"kind": "contiguous", "window", "stride"},
/// {"kind": "overlapping", "window"} or {"layers": [{"windows", "stride"}]}.
PoolingSchedule schedule_from_json(const Json& j, int positions);

Json to_json(const OperatorSpec& op);
OperatorSpec operator_from_json(const Json& j);

Json to_json(const Architecture& a);
Architecture architecture_from_json(const Json& j);

Json to_json(const CircuitSpec& c);
CircuitSpec circuit_from_json(const Json& j);

Json to_json(const HierarchicalParams& p);
HierarchicalParams hierarchical_params_from_json(const Json& j);

Json to_json(const Partition& p);
/// Accepts "even_odd", "contiguous_halves", {"window_splitting": layer},
/// {"custom": [modes]} or {"left": [modes]}.
Partition partition_from_json(const Json& j, int num_modes,
                              const std::optional<PoolingSchedule>& schedule = std::nullopt);
/// "all" or a list of partition specs.
std::vector<Partition> partitions_from_json(const Json& j, int num_modes,
                                            const std::optional<PoolingSchedule>& schedule =
                                                std::nullopt);

std::string to_string(const BigInt& v);

}  // namespace htcirc
