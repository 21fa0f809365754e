#include "htcirc/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "htcirc/errors.hpp"

namespace htcirc {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void CpParams::validate() const {
  if (order < 1 || mode_length < 1) throw InvalidArgument("CP order and mode length must be >= 1");
  if (vectors.empty()) throw InvalidArgument("CP decomposition needs r0 >= 1 terms");
  if (weights.size() != vectors.size()) {
    throw InvalidArgument("CP output weights (" + std::to_string(weights.size()) +
                          ") must match the number of terms (" +
                          std::to_string(vectors.size()) + ")");
  }
  for (const auto& v : vectors) {
    if (v.size() != static_cast<std::size_t>(mode_length)) {
      throw InvalidArgument("CP vector length does not match mode length");
    }
  }
}

HierarchicalShape HierarchicalShape::uniform(ModeTree tree, int mode_length, int width) {
  std::vector<int> widths(tree.num_nodes());
  for (std::size_t v = 0; v < widths.size(); ++v) widths[v] = tree.is_leaf(v) ? mode_length : width;
  HierarchicalShape s{std::move(tree), mode_length, std::move(widths)};
  s.validate();
  return s;
}

HierarchicalShape HierarchicalShape::by_height(ModeTree tree, int mode_length,
                                               const std::vector<int>& widths_by_height) {
  std::vector<int> widths(tree.num_nodes());
  for (std::size_t v = 0; v < widths.size(); ++v) {
    if (tree.is_leaf(v)) {
      widths[v] = mode_length;
      continue;
    }
    const auto h = static_cast<std::size_t>(tree.depth_of(v));
    if (h > widths_by_height.size()) {
      throw InvalidArgument("no width given for tree height " + std::to_string(h));
    }
    widths[v] = widths_by_height[h - 1];
  }
  HierarchicalShape s{std::move(tree), mode_length, std::move(widths)};
  s.validate();
  return s;
}

void HierarchicalShape::validate() const {
  tree.check_invariants();
  if (mode_length < 1) throw InvalidArgument("mode length must be >= 1");
  if (widths.size() != tree.num_nodes()) {
    throw InvalidArgument("one width per mode-tree node is required");
  }
  for (std::size_t v = 0; v < widths.size(); ++v) {
    if (tree.is_leaf(v) && widths[v] != mode_length) {
      throw InvalidArgument("leaf widths must equal the mode length");
    }
    if (widths[v] < 1) throw InvalidArgument("widths must be positive");
  }
}

namespace {

void check_mixing(const HierarchicalParams& p, std::size_t v, std::size_t child_index,
                  Eigen::Index expected_cols) {
  const auto& m = p.mixing[v][child_index];
  if (m.rows() != p.width(v) || m.cols() != expected_cols) {
    throw InvalidArgument("mixing matrix for node " + std::to_string(v) + ", child " +
                          std::to_string(child_index) + " is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(p.width(v)) +
                          "x" + std::to_string(expected_cols));
  }
  if (!m.allFinite()) throw InvalidArgument("mixing coefficients must be finite");
}

/// Validates everything except the column counts of mixing matrices.
void check_layout(const HierarchicalParams& p) {
  p.shape.validate();
  const auto& tree = p.tree();
  if (p.mixing.size() != tree.num_nodes()) {
    throw InvalidArgument("mixing must hold one entry per mode-tree node");
  }
  for (std::size_t v = 0; v < tree.num_nodes(); ++v) {
    if (p.mixing[v].size() != tree.node(v).children.size()) {
      throw InvalidArgument("node " + std::to_string(v) + " needs one mixing matrix per child");
    }
  }
  if (p.output_weights.size() != static_cast<std::size_t>(p.width(tree.root()))) {
    throw InvalidArgument("output weights must match the root width");
  }
}

}  // namespace

void HierarchicalParams::validate() const {
  check_layout(*this);
  for (std::size_t v = 0; v < tree().num_nodes(); ++v) {
    const auto& kids = tree().node(v).children;
    for (std::size_t i = 0; i < kids.size(); ++i) check_mixing(*this, v, i, width(kids[i]));
  }
}

std::vector<std::vector<Mode>> common_nodes(const ModeTree& a, const ModeTree& b,
                                            bool include_leaves) {
  std::vector<std::vector<Mode>> out;
  for (std::size_t v = 0; v < a.num_nodes(); ++v) {
    if (v == a.root()) continue;
    if (!include_leaves && a.is_leaf(v)) continue;
    if (b.find(a.node(v).modes)) out.push_back(a.node(v).modes);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

bool is_exchange(const std::vector<std::vector<Mode>>& exchange, const std::vector<Mode>& modes) {
  return std::binary_search(exchange.begin(), exchange.end(), modes);
}

std::size_t partner(const ModeTree& other, const std::vector<Mode>& modes) {
  auto id = other.find(modes);
  if (!id) throw InvalidArgument("exchange node is absent from the partner tree");
  return *id;
}

}  // namespace

void MixedParams::validate() const {
  check_layout(left);
  check_layout(right);
  if (left.shape.mode_length != right.shape.mode_length ||
      left.tree().num_modes() != right.tree().num_modes()) {
    throw InvalidArgument("mixed decomposition needs matching N and M on both sides");
  }
  if (!std::is_sorted(exchange.begin(), exchange.end())) {
    throw InvalidArgument("exchange node list must be sorted");
  }
  for (const auto& e : exchange) {
    if (!std::is_sorted(e.begin(), e.end())) throw InvalidArgument("exchange modes must be sorted");
    const auto l = left.tree().find(e);
    const auto r = right.tree().find(e);
    if (!l || !r) throw InvalidArgument("exchange node is absent from one of the trees");
    if (*l == left.tree().root()) throw InvalidArgument("the root cannot be an exchange node");
  }
  auto check_side = [this](const HierarchicalParams& self, const HierarchicalParams& other) {
    for (std::size_t v = 0; v < self.tree().num_nodes(); ++v) {
      const auto& kids = self.tree().node(v).children;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        const auto& modes = self.tree().node(kids[i]).modes;
        Eigen::Index cols = self.width(kids[i]);
        if (is_exchange(exchange, modes)) cols += other.width(partner(other.tree(), modes));
        check_mixing(self, v, i, cols);
      }
    }
  };
  check_side(left, right);
  check_side(right, left);
}

namespace {

using Channels = std::vector<DenseTensor>;

Channels basis_channels(int mode_length) {
  Channels out;
  for (int a = 0; a < mode_length; ++a) {
    std::vector<double> e(static_cast<std::size_t>(mode_length), 0.0);
    e[static_cast<std::size_t>(a)] = 1.0;
    out.push_back(DenseTensor::vector(std::move(e)));
  }
  return out;
}

/// sum_a weights(row, a) * inputs[a]
DenseTensor mix(const Matrix& weights, Eigen::Index row, const Channels& inputs) {
  std::vector<double> acc(inputs.front().size(), 0.0);
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    const double w = weights(row, static_cast<Eigen::Index>(a));
    const auto src = inputs[a].entries();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * src[k];
  }
  return DenseTensor(inputs.front().shape(), std::move(acc));
}

/// Concatenating children in order yields modes in this order; the permutation
/// brings them back to ascending.
std::vector<std::size_t> sort_permutation(const std::vector<Mode>& concat_modes) {
  std::vector<std::size_t> perm(concat_modes.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return concat_modes[a] < concat_modes[b]; });
  return perm;
}

enum class ProductRoute { outer, generalized };

/// Channels of node v given its children's (pooled) input channels. Every
/// channel tensor is kept in ascending mode order.
Channels combine(const ModeTree& tree, std::size_t v, const std::vector<Matrix>& mixing,
                 const std::vector<const Channels*>& inputs, int width, ProductRoute route,
                 const OperatorSpec& op) {
  const auto& kids = tree.node(v).children;
  std::vector<Mode> concat_modes;
  for (auto c : kids) {
    const auto& m = tree.node(c).modes;
    concat_modes.insert(concat_modes.end(), m.begin(), m.end());
  }
  const auto perm = sort_permutation(concat_modes);
  const bool sorted = std::is_sorted(concat_modes.begin(), concat_modes.end());

  Channels out;
  out.reserve(static_cast<std::size_t>(width));
  for (int g = 0; g < width; ++g) {
    std::vector<DenseTensor> factors;
    factors.reserve(kids.size());
    for (std::size_t i = 0; i < kids.size(); ++i) factors.push_back(mix(mixing[i], g, *inputs[i]));

    DenseTensor joined = [&] {
      if (route == ProductRoute::generalized) return generalized_outer_product(factors, op);
      DenseTensor acc = factors.front();
      for (std::size_t i = 1; i < factors.size(); ++i) acc = outer_product(acc, factors[i]);
      return acc;
    }();
    out.push_back(sorted ? std::move(joined) : permute_modes(joined, perm));
  }
  return out;
}

DenseTensor read_out(const Channels& root, const std::vector<double>& weights) {
  std::vector<double> acc(root.front().size(), 0.0);
  for (std::size_t g = 0; g < root.size(); ++g) {
    const auto src = root[g].entries();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += weights[g] * src[k];
  }
  return DenseTensor(root.front().shape(), std::move(acc));
}

std::vector<Channels> run_tree(const HierarchicalParams& p, ProductRoute route,
                               const OperatorSpec& op) {
  const auto& tree = p.tree();
  const Channels basis = basis_channels(p.shape.mode_length);
  std::vector<Channels> ch(tree.num_nodes());
  for (std::size_t v = 0; v < tree.num_nodes(); ++v) {
    if (tree.is_leaf(v)) continue;
    std::vector<const Channels*> inputs;
    for (auto c : tree.node(v).children) inputs.push_back(tree.is_leaf(c) ? &basis : &ch[c]);
    ch[v] = combine(tree, v, p.mixing[v], inputs, p.width(v), route, op);
  }
  return ch;
}

}  // namespace

DenseTensor cp_generate(const CpParams& p) {
  p.validate();
  const Shape shape(static_cast<std::size_t>(p.order), static_cast<std::size_t>(p.mode_length));
  std::vector<double> acc(static_cast<std::size_t>(std::pow(p.mode_length, p.order)), 0.0);
  for (std::size_t g = 0; g < p.vectors.size(); ++g) {
    const DenseTensor v = DenseTensor::vector(p.vectors[g]);
    DenseTensor term = v;
    for (int k = 1; k < p.order; ++k) term = outer_product(term, v);
    const auto e = term.entries();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p.weights[g] * e[k];
  }
  return DenseTensor(shape, std::move(acc));
}

DenseTensor hierarchical_generate(const HierarchicalParams& p) {
  p.validate();
  const auto ch = run_tree(p, ProductRoute::outer, OperatorSpec::arithmetic());
  return read_out(ch[p.tree().root()], p.output_weights);
}

DenseTensor generalized_generate(const HierarchicalParams& p, const OperatorSpec& op) {
  p.validate();
  const auto ch = run_tree(p, ProductRoute::generalized, op);
  return read_out(ch[p.tree().root()], p.output_weights);
}

DenseTensor mixed_generate(const MixedParams& p) {
  p.validate();
  const auto& lt = p.left.tree();
  const auto& rt = p.right.tree();
  const Channels basis = basis_channels(p.left.shape.mode_length);
  const auto op = OperatorSpec::arithmetic();

  // Both trees are evaluated bottom-up by node size, so every exchange node is
  // finished on both sides before either parent reads its pool.
  struct Item {
    bool left;
    std::size_t node;
  };
  std::vector<Item> order;
  for (std::size_t v = 0; v < lt.num_nodes(); ++v) order.push_back({true, v});
  for (std::size_t v = 0; v < rt.num_nodes(); ++v) order.push_back({false, v});
  std::stable_sort(order.begin(), order.end(), [&](const Item& a, const Item& b) {
    const auto sa = (a.left ? lt : rt).node(a.node).modes.size();
    const auto sb = (b.left ? lt : rt).node(b.node).modes.size();
    return sa < sb;
  });

  std::vector<Channels> lch(lt.num_nodes()), rch(rt.num_nodes());
  auto own = [&](bool left, std::size_t v) -> const Channels& {
    const auto& tree = left ? lt : rt;
    if (tree.is_leaf(v)) return basis;
    return left ? lch[v] : rch[v];
  };

  std::vector<Channels> pools;
  pools.reserve(2 * (lt.num_nodes() + rt.num_nodes()));
  for (const auto& item : order) {
    const auto& tree = item.left ? lt : rt;
    const auto& other = item.left ? rt : lt;
    const auto& params = item.left ? p.left : p.right;
    if (tree.is_leaf(item.node)) continue;
    std::vector<const Channels*> inputs;
    for (auto c : tree.node(item.node).children) {
      const auto& modes = tree.node(c).modes;
      if (!is_exchange(p.exchange, modes)) {
        inputs.push_back(&own(item.left, c));
        continue;
      }
      // left block first regardless of which side is reading
      const std::size_t oc = partner(other, modes);
      const Channels& lhs = item.left ? own(true, c) : own(true, oc);
      const Channels& rhs = item.left ? own(false, oc) : own(false, c);
      Channels pool = lhs;
      pool.insert(pool.end(), rhs.begin(), rhs.end());
      pools.push_back(std::move(pool));
      inputs.push_back(&pools.back());
    }
    auto result = combine(tree, item.node, params.mixing[item.node], inputs,
                          params.width(item.node), ProductRoute::outer, op);
    (item.left ? lch : rch)[item.node] = std::move(result);
  }

  const DenseTensor a = read_out(lch[lt.root()], p.left.output_weights);
  const DenseTensor b = read_out(rch[rt.root()], p.right.output_weights);
  std::vector<double> sum(a.size());
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = a[k] + b[k];
  return DenseTensor(a.shape(), std::move(sum));
}

HierarchicalParams max_pooling_deep_equivalent(const CpParams& shallow) {
  shallow.validate();
  const ModeTree tree = perfect_binary_tree(shallow.order);
  auto shape = HierarchicalShape::uniform(tree, shallow.mode_length, shallow.terms());
  const auto r = static_cast<Eigen::Index>(shallow.terms());
  Matrix first(r, shallow.mode_length);
  for (Eigen::Index g = 0; g < r; ++g) {
    for (Eigen::Index a = 0; a < shallow.mode_length; ++a) {
      first(g, a) = shallow.vectors[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)];
    }
  }
  std::vector<std::vector<Matrix>> mixing(tree.num_nodes());
  for (std::size_t v = 0; v < tree.num_nodes(); ++v) {
    for (auto c : tree.node(v).children) {
      mixing[v].push_back(tree.is_leaf(c) ? first : Matrix(Matrix::Identity(r, r)));
    }
  }
  HierarchicalParams p{std::move(shape), std::move(mixing), shallow.weights};
  p.validate();
  return p;
}

namespace {

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = nd(rng);
  }
  return m;
}

std::vector<double> normal_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

HierarchicalParams sample_side(const HierarchicalShape& shape,
                               const std::function<Eigen::Index(std::size_t)>& child_cols,
                               std::mt19937_64& rng) {
  const auto& tree = shape.tree;
  std::vector<std::vector<Matrix>> mixing(tree.num_nodes());
  for (std::size_t v = 0; v < tree.num_nodes(); ++v) {
    for (auto c : tree.node(v).children) {
      mixing[v].push_back(normal_matrix(shape.widths[v], child_cols(c), rng));
    }
  }
  auto weights = normal_vector(static_cast<std::size_t>(shape.widths[tree.root()]), rng);
  return HierarchicalParams{shape, std::move(mixing), std::move(weights)};
}

}  // namespace

CpParams sample_cp_params(const CpShape& shape, std::uint64_t seed) {
  auto rng = make_rng(seed);
  CpParams p;
  p.order = shape.order;
  p.mode_length = shape.mode_length;
  for (int g = 0; g < shape.terms; ++g) {
    p.vectors.push_back(normal_vector(static_cast<std::size_t>(shape.mode_length), rng));
  }
  p.weights = normal_vector(static_cast<std::size_t>(shape.terms), rng);
  p.validate();
  return p;
}

HierarchicalParams sample_hierarchical_params(const HierarchicalShape& shape, std::uint64_t seed) {
  shape.validate();
  auto rng = make_rng(seed);
  auto p = sample_side(shape, [&](std::size_t c) { return shape.widths[c]; }, rng);
  p.validate();
  return p;
}

MixedParams sample_mixed_params(const HierarchicalShape& left, const HierarchicalShape& right,
                                const std::vector<std::vector<Mode>>& exchange,
                                std::uint64_t seed) {
  left.validate();
  right.validate();
  std::vector<std::vector<Mode>> ex(exchange);
  for (auto& e : ex) std::sort(e.begin(), e.end());
  std::sort(ex.begin(), ex.end());
  auto cols = [&ex](const HierarchicalShape& self, const HierarchicalShape& other) {
    return [&ex, &self, &other](std::size_t c) -> Eigen::Index {
      const auto& modes = self.tree.node(c).modes;
      Eigen::Index n = self.widths[c];
      if (is_exchange(ex, modes)) n += other.widths[partner(other.tree, modes)];
      return n;
    };
  };
  auto rng = make_rng(seed);
  auto lhs = sample_side(left, cols(left, right), rng);
  auto rhs = sample_side(right, cols(right, left), rng);
  MixedParams p{std::move(lhs), std::move(rhs), std::move(ex)};
  p.validate();
  return p;
}

}  // namespace htcirc
