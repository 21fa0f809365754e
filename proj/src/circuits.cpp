#include "htcirc/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "htcirc/errors.hpp"

namespace htcirc {

std::string to_string(Representation r) {
  return r == Representation::one_hot_grid ? "one_hot_grid" : "table";
}

std::string to_string(WeightSharing s) {
  return s == WeightSharing::shared ? "shared" : "per_position";
}

std::string to_string(ConvKind k) { return k == ConvKind::pointwise ? "pointwise" : "generalized"; }

Representation representation_from_string(const std::string& s) {
  if (s == "one_hot_grid") return Representation::one_hot_grid;
  if (s == "table") return Representation::table;
  throw InvalidArgument("unknown representation '" + s + "'");
}

WeightSharing sharing_from_string(const std::string& s) {
  if (s == "shared") return WeightSharing::shared;
  if (s == "per_position") return WeightSharing::per_position;
  throw InvalidArgument("unknown weight sharing '" + s + "'");
}

ConvKind conv_kind_from_string(const std::string& s) {
  if (s == "pointwise") return ConvKind::pointwise;
  if (s == "generalized") return ConvKind::generalized;
  throw InvalidArgument("unknown convolution kind '" + s + "'");
}

std::vector<double> input_grid(int grid_size) {
  if (grid_size < 1) throw InvalidArgument("grid size must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(grid_size));
  for (int d = 1; d <= grid_size; ++d) g[static_cast<std::size_t>(d - 1)] = double(d) / grid_size;
  return g;
}

int Architecture::input_width(std::size_t layer) const {
  return layer == 0 ? grid_size : widths.at(layer - 1);
}

std::size_t Architecture::slots(std::size_t layer) const {
  return sharing == WeightSharing::shared ? 1 : schedule.output_length(layer);
}

std::size_t Architecture::offsets(std::size_t layer) const {
  return conv == ConvKind::pointwise ? 1 : schedule.layer(layer).window_size();
}

void Architecture::validate() const {
  if (positions < 1) throw InvalidArgument("circuit needs at least one input position");
  if (grid_size < 1) throw InvalidArgument("grid size M must be >= 1");
  if (schedule.spatial_size() != positions) {
    throw InvalidArgument("schedule covers " + std::to_string(schedule.spatial_size()) +
                          " positions but the circuit has " + std::to_string(positions));
  }
  if (schedule.num_layers() == 0) throw InvalidArgument("circuit needs at least one layer");
  if (widths.size() != schedule.num_layers()) {
    throw InvalidArgument("widths list has " + std::to_string(widths.size()) +
                          " entries for " + std::to_string(schedule.num_layers()) + " layers");
  }
  for (int w : widths) {
    if (w < 1) throw InvalidArgument("layer widths must be >= 1");
  }
}

void CircuitSpec::validate() const {
  arch.validate();
  if (arch.representation == Representation::table) {
    if (table.size() != static_cast<std::size_t>(arch.grid_size)) {
      throw InvalidArgument("representation table needs one row per grid point");
    }
    for (const auto& row : table) {
      if (row.size() != static_cast<std::size_t>(arch.grid_size)) {
        throw InvalidArgument("representation table rows need M values");
      }
    }
  }
  if (conv.size() != arch.schedule.num_layers()) {
    throw InvalidArgument("conv weights need one entry per layer");
  }
  for (std::size_t k = 0; k < conv.size(); ++k) {
    const std::string where = "layer " + std::to_string(k + 1);
    if (conv[k].size() != arch.slots(k)) {
      throw InvalidArgument(where + " needs " + std::to_string(arch.slots(k)) + " kernel slots");
    }
    for (const auto& slot : conv[k]) {
      if (slot.size() != arch.offsets(k)) {
        throw InvalidArgument(where + " needs " + std::to_string(arch.offsets(k)) +
                              " kernels per slot");
      }
      for (const auto& m : slot) {
        if (m.rows() != arch.widths[k] || m.cols() != arch.input_width(k)) {
          throw InvalidArgument(where + " kernel is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " +
                                std::to_string(arch.widths[k]) + "x" +
                                std::to_string(arch.input_width(k)));
        }
        if (!m.allFinite()) throw InvalidArgument(where + " kernel has non-finite weights");
      }
    }
  }
  if (output_weights.size() != static_cast<std::size_t>(arch.widths.back())) {
    throw InvalidArgument("output weights must match the last layer width");
  }
}

CircuitSpec sample_circuit(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  auto rng = make_rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  CircuitSpec c;
  c.arch = arch;
  if (arch.representation == Representation::table) {
    c.table.assign(static_cast<std::size_t>(arch.grid_size),
                   std::vector<double>(static_cast<std::size_t>(arch.grid_size)));
    for (auto& row : c.table) {
      for (auto& x : row) x = nd(rng);
    }
  }
  c.conv.resize(arch.schedule.num_layers());
  for (std::size_t k = 0; k < c.conv.size(); ++k) {
    c.conv[k].resize(arch.slots(k));
    for (auto& slot : c.conv[k]) {
      for (std::size_t j = 0; j < arch.offsets(k); ++j) {
        Matrix m(arch.widths[k], arch.input_width(k));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          for (Eigen::Index col = 0; col < m.cols(); ++col) m(r, col) = nd(rng);
        }
        slot.push_back(std::move(m));
      }
    }
  }
  c.output_weights.resize(static_cast<std::size_t>(arch.widths.back()));
  for (auto& w : c.output_weights) w = nd(rng);
  return c;
}

Architecture deep_architecture(int positions, int grid_size, int width, OperatorSpec op) {
  auto schedule = PoolingSchedule::baseline(positions);
  Architecture a{positions,
                 grid_size,
                 Representation::one_hot_grid,
                 schedule,
                 std::vector<int>(schedule.num_layers(), width),
                 op,
                 WeightSharing::per_position,
                 ConvKind::generalized};
  a.validate();
  return a;
}

Architecture shallow_architecture(int positions, int grid_size, int r0, OperatorSpec op) {
  Architecture a{positions,
                 grid_size,
                 Representation::one_hot_grid,
                 PoolingSchedule::global(positions),
                 {r0},
                 op,
                 WeightSharing::shared,
                 ConvKind::pointwise};
  a.validate();
  return a;
}

Architecture overlapping_architecture(int positions, int grid_size, int window, int width,
                                      OperatorSpec op) {
  auto schedule = PoolingSchedule::overlapping(positions, window);
  Architecture a{positions,
                 grid_size,
                 Representation::one_hot_grid,
                 schedule,
                 std::vector<int>(schedule.num_layers(), width),
                 op,
                 WeightSharing::per_position,
                 ConvKind::generalized};
  a.validate();
  return a;
}

namespace {

using Values = std::vector<Eigen::VectorXd>;

Values represent(const CircuitSpec& c, const std::vector<int>& grid_indices) {
  const int n = c.arch.positions;
  const int m = c.arch.grid_size;
  if (grid_indices.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("expected " + std::to_string(n) + " grid indices, got " +
                          std::to_string(grid_indices.size()));
  }
  Values x;
  x.reserve(grid_indices.size());
  for (std::size_t p = 0; p < grid_indices.size(); ++p) {
    const int d = grid_indices[p];
    if (d < 1 || d > m) {
      throw InvalidArgument("grid index " + std::to_string(d) + " at position " +
                            std::to_string(p + 1) + " is outside 1.." + std::to_string(m));
    }
    if (c.arch.representation == Representation::one_hot_grid) {
      x.push_back(Eigen::VectorXd::Unit(m, d - 1));
    } else {
      const auto& row = c.table[static_cast<std::size_t>(d - 1)];
      x.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), m));
    }
  }
  return x;
}

double evaluate(const CircuitSpec& c, Values x) {
  const auto& arch = c.arch;
  std::vector<double> window_values;
  for (std::size_t k = 0; k < arch.schedule.num_layers(); ++k) {
    const auto& layer = arch.schedule.layer(k);
    const std::size_t width = static_cast<std::size_t>(arch.widths[k]);
    Values next;
    next.reserve(layer.windows.size());
    for (std::size_t q = 0; q < layer.windows.size(); ++q) {
      const auto& w = layer.windows[q];
      const auto& slot = c.conv[k][arch.sharing == WeightSharing::shared ? 0 : q];
      std::vector<Eigen::VectorXd> mixed;
      mixed.reserve(w.size());
      for (std::size_t j = 0; j < w.size(); ++j) {
        const auto& kernel = slot[arch.conv == ConvKind::pointwise ? 0 : j];
        mixed.push_back(kernel * x[static_cast<std::size_t>(w[j] - 1)]);
      }
      Eigen::VectorXd out(static_cast<Eigen::Index>(width));
      window_values.resize(w.size());
      for (std::size_t g = 0; g < width; ++g) {
        for (std::size_t j = 0; j < w.size(); ++j) {
          window_values[j] = mixed[j](static_cast<Eigen::Index>(g));
        }
        out(static_cast<Eigen::Index>(g)) = arch.op.apply(window_values);
      }
      next.push_back(std::move(out));
    }
    x = std::move(next);
  }
  double y = 0.0;
  for (std::size_t g = 0; g < c.output_weights.size(); ++g) {
    y += c.output_weights[g] * x.front()(static_cast<Eigen::Index>(g));
  }
  return y;
}

}  // namespace

double forward_eval(const CircuitSpec& c, const std::vector<int>& grid_indices) {
  c.validate();
  return evaluate(c, represent(c, grid_indices));
}

std::uint64_t check_grid_guard(int positions, int grid_size, std::uint64_t guard) {
  if (positions < 1 || grid_size < 1) throw InvalidArgument("N and M must be >= 1");
  std::uint64_t size = 1;
  bool overflow = false;
  for (int k = 0; k < positions; ++k) {
    if (size > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(grid_size)) {
      overflow = true;
      break;
    }
    size *= static_cast<std::uint64_t>(grid_size);
  }
  if (overflow) size = std::numeric_limits<std::uint64_t>::max();
  if (size > guard) throw GuardError(size, guard);
  return size;
}

DenseTensor grid_tensor(const CircuitSpec& c, std::uint64_t guard) {
  c.validate();
  const auto n = static_cast<std::size_t>(c.arch.positions);
  const auto m = static_cast<std::size_t>(c.arch.grid_size);
  const auto size = static_cast<std::size_t>(check_grid_guard(c.arch.positions, c.arch.grid_size, guard));
  std::vector<double> entries(size);
  std::vector<int> index(n, 1);
  for (std::size_t flat = 0; flat < size; ++flat) {
    entries[flat] = evaluate(c, represent(c, index));
    for (std::size_t k = n; k-- > 0;) {
      if (static_cast<std::size_t>(++index[k]) <= m) break;
      index[k] = 1;
    }
  }
  return DenseTensor(Shape(n, m), std::move(entries));
}

std::vector<std::vector<std::vector<Mode>>> schedule_coverage(const PoolingSchedule& schedule) {
  std::vector<std::vector<Mode>> current;
  for (Mode p = 1; p <= schedule.spatial_size(); ++p) current.push_back({p});
  std::vector<std::vector<std::vector<Mode>>> out;
  for (const auto& layer : schedule.layers()) {
    std::vector<std::vector<Mode>> next;
    for (const auto& w : layer.windows) {
      std::vector<Mode> modes;
      for (int p : w) {
        const auto& sub = current[static_cast<std::size_t>(p - 1)];
        modes.insert(modes.end(), sub.begin(), sub.end());
      }
      std::sort(modes.begin(), modes.end());
      modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
      next.push_back(std::move(modes));
    }
    out.push_back(next);
    current = std::move(next);
  }
  return out;
}

HierarchicalParams map_to_decomposition(const CircuitSpec& c) {
  c.validate();
  const auto& arch = c.arch;
  if (arch.representation != Representation::one_hot_grid) {
    throw InvalidArgument("only one_hot_grid circuits map onto a decomposition");
  }
  if (arch.schedule.has_overlaps()) {
    throw InvalidArgument("overlapping schedules have no single-tree decomposition");
  }
  ModeTree tree = tree_from_schedule(arch.schedule);
  const auto coverage = schedule_coverage(arch.schedule);

  std::vector<int> widths(tree.num_nodes(), arch.grid_size);
  std::vector<std::vector<Matrix>> mixing(tree.num_nodes());
  for (std::size_t k = 0; k < coverage.size(); ++k) {
    const auto& layer = arch.schedule.layer(k);
    for (std::size_t q = 0; q < coverage[k].size(); ++q) {
      const std::size_t v = *tree.find(coverage[k][q]);
      widths[v] = arch.widths[k];
      const auto& slot = c.conv[k][arch.sharing == WeightSharing::shared ? 0 : q];
      for (auto child : tree.node(v).children) {
        const auto& modes = tree.node(child).modes;
        std::size_t j = 0;
        while (j < layer.windows[q].size()) {
          const auto pos = static_cast<std::size_t>(layer.windows[q][j] - 1);
          const auto& below = k == 0 ? std::vector<Mode>{static_cast<Mode>(pos + 1)}
                                     : coverage[k - 1][pos];
          if (below == modes) break;
          ++j;
        }
        if (j == layer.windows[q].size()) {
          throw InvariantError("mode tree does not follow the pooling windows");
        }
        mixing[v].push_back(slot[arch.conv == ConvKind::pointwise ? 0 : j]);
      }
    }
  }
  HierarchicalShape shape{std::move(tree), arch.grid_size, std::move(widths)};
  HierarchicalParams p{std::move(shape), std::move(mixing), c.output_weights};
  p.validate();
  return p;
}

CpParams map_to_cp(const CircuitSpec& c) {
  c.validate();
  const auto& arch = c.arch;
  if (arch.representation != Representation::one_hot_grid) {
    throw InvalidArgument("only one_hot_grid circuits map onto a CP decomposition");
  }
  if (arch.schedule.num_layers() != 1 || arch.schedule.output_length(0) != 1 ||
      arch.schedule.layer(0).window_size() != static_cast<std::size_t>(arch.positions)) {
    throw InvalidArgument("CP mapping needs a single global pooling window");
  }
  if (arch.conv != ConvKind::pointwise) {
    throw InvalidArgument("CP mapping needs one kernel shared by every position");
  }
  const Matrix& a = c.conv[0][0][0];
  CpParams p;
  p.order = arch.positions;
  p.mode_length = arch.grid_size;
  for (Eigen::Index g = 0; g < a.rows(); ++g) {
    std::vector<double> v(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index d = 0; d < a.cols(); ++d) v[static_cast<std::size_t>(d)] = a(g, d);
    p.vectors.push_back(std::move(v));
  }
  p.weights = c.output_weights;
  p.validate();
  return p;
}

CircuitSpec shallow_circuit(const CpParams& p, OperatorSpec op) {
  p.validate();
  CircuitSpec c;
  c.arch = shallow_architecture(p.order, p.mode_length, p.terms(), op);
  Matrix a(p.terms(), p.mode_length);
  for (int g = 0; g < p.terms(); ++g) {
    for (int d = 0; d < p.mode_length; ++d) {
      a(g, d) = p.vectors[static_cast<std::size_t>(g)][static_cast<std::size_t>(d)];
    }
  }
  c.conv = {{{a}}};
  c.output_weights = p.weights;
  c.validate();
  return c;
}

namespace {

struct Interval {
  Mode lo;
  Mode hi;
};

Interval interval_of(const ModeTree& tree, std::size_t v) {
  const auto& m = tree.node(v).modes;
  return {m.front(), m.back()};
}

/// What an overlapping layer position computes for the embedded decomposition.
struct Slot {
  enum class Kind { idle, node, left_carrier, right_carrier } kind = Kind::idle;
  std::size_t node = 0;  // the node itself, or the carried child
};

}  // namespace

CircuitSpec embed_in_overlapping(const HierarchicalParams& p) {
  p.validate();
  const auto& tree = p.tree();
  const int n = static_cast<int>(tree.num_modes());
  const int m = p.shape.mode_length;
  if (n < 2) throw InvalidArgument("embedding needs at least two modes");
  for (std::size_t v = 0; v < tree.num_nodes(); ++v) {
    const auto& node = tree.node(v);
    if (node.modes.back() - node.modes.front() + 1 != static_cast<int>(node.modes.size())) {
      throw InvalidArgument("embedding needs every node to cover a contiguous range of modes");
    }
    if (!tree.is_leaf(v) && node.children.size() != 2) {
      throw InvalidArgument("embedding needs a binary mode tree");
    }
  }

  // left child index within the node's children
  auto left_index = [&](std::size_t v) -> std::size_t {
    const auto& kids = tree.node(v).children;
    return interval_of(tree, kids[0]).lo < interval_of(tree, kids[1]).lo ? 0 : 1;
  };

  auto classify = [&](Mode lo, Mode hi) -> Slot {
    std::optional<std::size_t> best;
    for (std::size_t v = 0; v < tree.num_nodes(); ++v) {
      const auto iv = interval_of(tree, v);
      if (iv.lo <= lo && hi <= iv.hi &&
          (!best || tree.node(v).modes.size() < tree.node(*best).modes.size())) {
        best = v;
      }
    }
    const auto iv = interval_of(tree, *best);
    if (iv.lo == lo && iv.hi == hi) return {Slot::Kind::node, *best};
    const auto li = left_index(*best);
    const auto& kids = tree.node(*best).children;
    if (iv.lo == lo) return {Slot::Kind::left_carrier, kids[li]};
    if (iv.hi == hi) return {Slot::Kind::right_carrier, kids[1 - li]};
    return {};
  };

  const int layers = n - 1;
  std::vector<std::vector<Slot>> plan(static_cast<std::size_t>(layers + 1));
  int payload = 1;
  for (int l = 1; l <= layers; ++l) {
    for (Mode lo = 1; lo + l <= n; ++lo) {
      const Slot s = classify(lo, lo + l);
      plan[static_cast<std::size_t>(l)].push_back(s);
      if (s.kind != Slot::Kind::idle) payload = std::max(payload, p.width(s.node));
    }
  }
  const int width = payload + 1;

  CircuitSpec c;
  c.arch = overlapping_architecture(n, m, 2, width);
  c.conv.resize(static_cast<std::size_t>(layers));
  for (int l = 1; l <= layers; ++l) {
    const bool raw_input = l == 1;
    const int in_width = raw_input ? m : width;
    const int col = raw_input ? 0 : 1;
    const Eigen::RowVectorXd one = raw_input ? Eigen::RowVectorXd(Eigen::RowVectorXd::Ones(m))
                                             : Eigen::RowVectorXd(Eigen::RowVectorXd::Unit(width, 0));
    auto& layer = c.conv[static_cast<std::size_t>(l - 1)];
    for (const auto& s : plan[static_cast<std::size_t>(l)]) {
      Matrix a0 = Matrix::Zero(width, in_width);
      Matrix a1 = Matrix::Zero(width, in_width);
      a0.row(0) = one;
      a1.row(0) = one;
      switch (s.kind) {
        case Slot::Kind::node: {
          const auto li = left_index(s.node);
          const Matrix& wl = p.mixing[s.node][li];
          const Matrix& wr = p.mixing[s.node][1 - li];
          a0.block(1, col, wl.rows(), wl.cols()) = wl;
          a1.block(1, col, wr.rows(), wr.cols()) = wr;
          break;
        }
        case Slot::Kind::left_carrier: {
          const int r = p.width(s.node);
          a0.block(1, col, r, r) = Matrix::Identity(r, r);
          for (int g = 1; g <= r; ++g) a1.row(g) = one;
          break;
        }
        case Slot::Kind::right_carrier: {
          const int r = p.width(s.node);
          for (int g = 1; g <= r; ++g) a0.row(g) = one;
          a1.block(1, col, r, r) = Matrix::Identity(r, r);
          break;
        }
        case Slot::Kind::idle:
          break;
      }
      layer.push_back({std::move(a0), std::move(a1)});
    }
  }
  c.output_weights.assign(static_cast<std::size_t>(width), 0.0);
  std::copy(p.output_weights.begin(), p.output_weights.end(), c.output_weights.begin() + 1);
  c.validate();
  return c;
}

}  // namespace htcirc
