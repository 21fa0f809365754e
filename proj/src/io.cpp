#include "htcirc/io.hpp"

#include "htcirc/errors.hpp"

namespace htcirc {

namespace {

const Json& field(const Json& j, const std::string& name) {
  if (!j.is_object() || !j.contains(name)) {
    throw InvalidArgument("missing field '" + name + "'");
  }
  return j.at(name);
}

template <typename T>
T as(const Json& j, const std::string& name) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("field '" + name + "' has the wrong type");
  }
}

template <typename T>
T get(const Json& j, const std::string& name) {
  return as<T>(field(j, name), name);
}

template <typename T>
T get_or(const Json& j, const std::string& name, T fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  return as<T>(j.at(name), name);
}

}  // namespace

Json to_json(const DenseTensor& t) {
  Json j;
  j["order"] = t.order();
  j["mode_lengths"] = t.shape();
  j["entries"] = std::vector<double>(t.entries().begin(), t.entries().end());
  return j;
}

DenseTensor tensor_from_json(const Json& j) {
  const auto shape = get<Shape>(j, "mode_lengths");
  if (j.contains("order") && get<std::size_t>(j, "order") != shape.size()) {
    throw InvalidArgument("field 'order' disagrees with 'mode_lengths'");
  }
  return DenseTensor(shape, get<std::vector<double>>(j, "entries"));
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& name) {
  const auto rows = as<std::vector<std::vector<double>>>(j, name);
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw InvalidArgument("field '" + name + "' is ragged");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

namespace {

Json subtree_json(const ModeTree& tree, std::size_t v) {
  Json j;
  j["modes"] = tree.node(v).modes;
  Json kids = Json::array();
  for (auto c : tree.node(v).children) kids.push_back(subtree_json(tree, c));
  j["children"] = std::move(kids);
  return j;
}

ModeTree subtree_from_json(const Json& j) {
  const Json empty = Json::array();
  const Json& kids = j.contains("children") ? j.at("children") : empty;
  if (!kids.is_array()) throw InvalidArgument("field 'children' must be an array");
  if (kids.empty()) {
    const auto modes = get<std::vector<Mode>>(j, "modes");
    if (modes.size() != 1) throw InvalidArgument("a leaf must list exactly one mode");
    return ModeTree::leaf(modes.front());
  }
  std::vector<ModeTree> children;
  for (const auto& k : kids) children.push_back(subtree_from_json(k));
  ModeTree t = ModeTree::join(children);
  if (j.contains("modes") && get<std::vector<Mode>>(j, "modes") != t.node(t.root()).modes) {
    throw InvalidArgument("field 'modes' disagrees with the children's modes");
  }
  return t;
}

}  // namespace

Json to_json(const ModeTree& tree) { return subtree_json(tree, tree.root()); }

ModeTree tree_from_json(const Json& j, int num_modes) {
  if (j.is_string()) {
    if (j.get<std::string>() == "baseline" && num_modes > 0) return perfect_binary_tree(num_modes);
    throw InvalidArgument("unknown tree '" + j.get<std::string>() + "'");
  }
  if (j.is_object() && j.contains("dilation")) {
    if (num_modes <= 0) throw InvalidArgument("dilation trees need the number of modes");
    return dilation_tree(num_modes, get<std::vector<int>>(j, "dilation"));
  }
  ModeTree t = subtree_from_json(j);
  t.check_invariants();
  if (num_modes > 0 && t.num_modes() != static_cast<std::size_t>(num_modes)) {
    throw InvalidArgument("tree covers " + std::to_string(t.num_modes()) + " modes, expected " +
                          std::to_string(num_modes));
  }
  return t;
}

Json to_json(const PoolingSchedule& s) {
  Json layers = Json::array();
  for (const auto& l : s.layers()) {
    Json layer;
    layer["windows"] = l.windows;
    layer["stride"] = l.stride;
    layers.push_back(std::move(layer));
  }
  Json j;
  j["layers"] = std::move(layers);
  return j;
}

PoolingSchedule schedule_from_json(const Json& j, int positions) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "baseline") return PoolingSchedule::baseline(positions);
    if (name == "global") return PoolingSchedule::global(positions);
    throw InvalidArgument("unknown schedule '" + name + "'");
  }
  if (j.contains("layers")) {
    std::vector<PoolingLayer> layers;
    for (const auto& l : field(j, "layers")) {
      layers.push_back({get<std::vector<std::vector<int>>>(l, "windows"), get_or<int>(l, "stride", 0)});
    }
    return PoolingSchedule(positions, std::move(layers));
  }
  const auto kind = get<std::string>(j, "kind");
  if (kind == "contiguous") {
    return PoolingSchedule::contiguous(positions, get<int>(j, "window"), get<int>(j, "stride"));
  }
  if (kind == "overlapping") return PoolingSchedule::overlapping(positions, get<int>(j, "window"));
  if (kind == "baseline") return PoolingSchedule::baseline(positions);
  if (kind == "global") return PoolingSchedule::global(positions);
  throw InvalidArgument("unknown schedule kind '" + kind + "'");
}

Json to_json(const OperatorSpec& op) {
  Json j;
  j["activation"] = to_string(op.activation);
  j["pooling"] = to_string(op.pooling);
  return j;
}

OperatorSpec operator_from_json(const Json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "arithmetic") return OperatorSpec::arithmetic();
    if (name == "rectifier_max") return OperatorSpec::rectifier_max();
    if (name == "rectifier_average") return OperatorSpec::rectifier_average();
    throw InvalidArgument("unknown operator '" + name + "'");
  }
  return {activation_from_string(get_or<std::string>(j, "activation", "identity")),
          pooling_from_string(get_or<std::string>(j, "pooling", "product"))};
}

Json to_json(const Architecture& a) {
  Json j;
  j["positions"] = a.positions;
  j["grid_size"] = a.grid_size;
  j["representation"] = to_string(a.representation);
  j["schedule"] = to_json(a.schedule);
  j["widths"] = a.widths;
  j["operator"] = to_json(a.op);
  j["sharing"] = to_string(a.sharing);
  j["conv"] = to_string(a.conv);
  return j;
}

Architecture architecture_from_json(const Json& j) {
  Architecture a;
  a.positions = get<int>(j, "positions");
  a.grid_size = get<int>(j, "grid_size");
  a.representation =
      representation_from_string(get_or<std::string>(j, "representation", "one_hot_grid"));
  a.schedule = j.contains("schedule") ? schedule_from_json(j.at("schedule"), a.positions)
                                      : PoolingSchedule::baseline(a.positions);
  const auto& w = field(j, "widths");
  if (w.is_number_integer()) {
    a.widths.assign(a.schedule.num_layers(), w.get<int>());
  } else {
    a.widths = as<std::vector<int>>(w, "widths");
  }
  if (j.contains("operator")) a.op = operator_from_json(j.at("operator"));
  a.sharing = sharing_from_string(get_or<std::string>(j, "sharing", "per_position"));
  a.conv = conv_kind_from_string(get_or<std::string>(j, "conv", "generalized"));
  a.validate();
  return a;
}

Json to_json(const CircuitSpec& c) {
  Json j;
  j["architecture"] = to_json(c.arch);
  if (c.arch.representation == Representation::table) j["table"] = c.table;
  Json conv = Json::array();
  for (const auto& layer : c.conv) {
    Json slots = Json::array();
    for (const auto& slot : layer) {
      Json kernels = Json::array();
      for (const auto& m : slot) kernels.push_back(to_json(m));
      slots.push_back(std::move(kernels));
    }
    conv.push_back(std::move(slots));
  }
  j["conv"] = std::move(conv);
  j["output_weights"] = c.output_weights;
  return j;
}

CircuitSpec circuit_from_json(const Json& j) {
  CircuitSpec c;
  c.arch = architecture_from_json(field(j, "architecture"));
  if (j.contains("table")) c.table = get<std::vector<std::vector<double>>>(j, "table");
  for (const auto& layer : field(j, "conv")) {
    std::vector<std::vector<Matrix>> slots;
    for (const auto& slot : layer) {
      std::vector<Matrix> kernels;
      for (const auto& m : slot) kernels.push_back(matrix_from_json(m, "conv"));
      slots.push_back(std::move(kernels));
    }
    c.conv.push_back(std::move(slots));
  }
  c.output_weights = get<std::vector<double>>(j, "output_weights");
  c.validate();
  return c;
}

Json to_json(const HierarchicalParams& p) {
  Json j;
  j["tree"] = to_json(p.tree());
  j["mode_length"] = p.shape.mode_length;
  j["widths"] = p.shape.widths;
  Json mixing = Json::array();
  for (const auto& node : p.mixing) {
    Json per_child = Json::array();
    for (const auto& m : node) per_child.push_back(to_json(m));
    mixing.push_back(std::move(per_child));
  }
  j["mixing"] = std::move(mixing);
  j["output_weights"] = p.output_weights;
  return j;
}

HierarchicalParams hierarchical_params_from_json(const Json& j) {
  HierarchicalShape shape{tree_from_json(field(j, "tree")), get<int>(j, "mode_length"),
                          get<std::vector<int>>(j, "widths")};
  std::vector<std::vector<Matrix>> mixing;
  for (const auto& node : field(j, "mixing")) {
    std::vector<Matrix> per_child;
    for (const auto& m : node) per_child.push_back(matrix_from_json(m, "mixing"));
    mixing.push_back(std::move(per_child));
  }
  HierarchicalParams p{std::move(shape), std::move(mixing),
                       get<std::vector<double>>(j, "output_weights")};
  p.validate();
  return p;
}

Json to_json(const Partition& p) {
  Json j;
  j["label"] = p.to_string();
  j["left"] = p.left();
  j["right"] = p.right();
  return j;
}

Partition partition_from_json(const Json& j, int num_modes,
                              const std::optional<PoolingSchedule>& schedule) {
  const auto n = static_cast<std::size_t>(num_modes);
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "even_odd") return resolve_partition(CanonicalPartition::even_odd(), num_modes);
    if (name == "contiguous_halves") {
      return resolve_partition(CanonicalPartition::contiguous_halves(), num_modes);
    }
    throw InvalidArgument("unknown partition '" + name + "'");
  }
  if (j.contains("window_splitting")) {
    return resolve_partition(CanonicalPartition::window_splitting(get<int>(j, "window_splitting")),
                             num_modes, schedule);
  }
  if (j.contains("custom")) return Partition(n, get<std::vector<Mode>>(j, "custom"));
  if (j.contains("left")) {
    if (j.contains("right")) {
      return Partition(n, get<std::vector<Mode>>(j, "left"), get<std::vector<Mode>>(j, "right"));
    }
    return Partition(n, get<std::vector<Mode>>(j, "left"));
  }
  throw InvalidArgument("unrecognized partition spec " + j.dump());
}

std::vector<Partition> partitions_from_json(const Json& j, int num_modes,
                                            const std::optional<PoolingSchedule>& schedule) {
  if (j.is_string() && j.get<std::string>() == "all") {
    return all_partitions(static_cast<std::size_t>(num_modes));
  }
  if (!j.is_array()) throw InvalidArgument("field 'partitions' must be \"all\" or a list");
  std::vector<Partition> out;
  for (const auto& p : j) out.push_back(partition_from_json(p, num_modes, schedule));
  if (out.empty()) throw InvalidArgument("field 'partitions' is empty");
  return out;
}

std::string to_string(const BigInt& v) { return v.str(); }

}  // namespace htcirc
