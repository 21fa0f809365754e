#include "htcirc/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "htcirc/errors.hpp"

namespace htcirc {

std::uint64_t TensorNetworkGraph::element_weight(std::size_t element) const {
  if (element < edges.size()) return edges[element].weight;
  return node_weights.at(element - edges.size());
}

void TensorNetworkGraph::validate() const {
  if (num_nodes == 0) throw InvariantError("tensor network has no nodes");
  if (node_weights.size() != num_nodes) throw InvariantError("node weight list has wrong size");
  std::vector<std::vector<std::size_t>> adj(num_nodes);
  for (const auto& e : edges) {
    if (e.a >= num_nodes || e.b >= num_nodes || e.a == e.b) {
      throw InvariantError("tensor network edge has invalid endpoints");
    }
    if (e.weight < 1) throw InvariantError("tensor network edge weight must be >= 1");
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (std::size_t k = 0; k < terminals.size(); ++k) {
    const auto t = terminals[k];
    if (t >= num_nodes) throw InvariantError("terminal refers to a missing node");
    if (adj[t].size() != 1 && num_nodes > 1) {
      throw InvariantError("terminal " + std::to_string(k + 1) + " does not have degree 1");
    }
    if (node_weights[t] != 0) throw InvariantError("terminals cannot be cut");
  }
  std::vector<bool> seen(num_nodes, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto u : adj[v]) {
      if (!seen[u]) {
        seen[u] = true;
        stack.push_back(u);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvariantError("tensor network is disconnected");
  }
}

TensorNetworkGraph build_tensor_network(const HierarchicalShape& shape) {
  shape.validate();
  const auto& tree = shape.tree;
  TensorNetworkGraph g;
  g.num_nodes = tree.num_nodes();
  g.node_weights.assign(g.num_nodes, 0);
  for (std::size_t v = 0; v < tree.num_nodes(); ++v) {
    const auto& node = tree.node(v);
    if (node.parent) {
      const int w = std::min(shape.widths[v], shape.widths[*node.parent]);
      g.edges.push_back({v, *node.parent, static_cast<std::uint64_t>(w)});
    }
    if (node.children.size() >= 3) g.node_weights[v] = static_cast<std::uint64_t>(shape.widths[v]);
  }
  for (Mode m = 1; m <= static_cast<Mode>(tree.num_modes()); ++m) {
    g.terminals.push_back(tree.leaf_of(m));
  }
  g.validate();
  return g;
}

HierarchicalShape architecture_shape(const Architecture& arch) {
  arch.validate();
  if (arch.schedule.has_overlaps()) {
    throw InvalidArgument("overlapping schedules do not form a tree-shaped network");
  }
  ModeTree tree = tree_from_schedule(arch.schedule);
  std::vector<int> widths(tree.num_nodes(), arch.grid_size);
  const auto coverage = schedule_coverage(arch.schedule);
  for (std::size_t k = 0; k < coverage.size(); ++k) {
    for (const auto& modes : coverage[k]) widths[*tree.find(modes)] = arch.widths[k];
  }
  HierarchicalShape shape{std::move(tree), arch.grid_size, std::move(widths)};
  shape.validate();
  return shape;
}

TensorNetworkGraph build_tensor_network(const Architecture& arch) {
  return build_tensor_network(architecture_shape(arch));
}

namespace {

constexpr double kInfinity = 1e30;

class Dinic {
 public:
  explicit Dinic(std::size_t n) : adj_(n), level_(n), next_(n) {}

  void add_arc(std::size_t from, std::size_t to, double cap) {
    adj_[from].push_back(arcs_.size());
    arcs_.push_back({to, cap});
    adj_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0.0});
  }

  double max_flow(std::size_t s, std::size_t t) {
    double total = 0.0;
    while (bfs(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const double f = dfs(s, t, kInfinity);
        if (f <= kEps) break;
        total += f;
        if (total >= kInfinity / 2) return kInfinity;
      }
    }
    return total;
  }

 private:
  static constexpr double kEps = 1e-14;

  struct Arc {
    std::size_t to;
    double cap;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto id : adj_[v]) {
        const auto& a = arcs_[id];
        if (a.cap > kEps && level_[a.to] < 0) {
          level_[a.to] = level_[v] + 1;
          q.push(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(std::size_t v, std::size_t t, double pushed) {
    if (v == t) return pushed;
    for (auto& i = next_[v]; i < adj_[v].size(); ++i) {
      const auto id = adj_[v][i];
      auto& a = arcs_[id];
      if (a.cap <= kEps || level_[a.to] != level_[v] + 1) continue;
      const double f = dfs(a.to, t, std::min(pushed, a.cap));
      if (f > kEps) {
        a.cap -= f;
        arcs_[id ^ 1].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

enum class Decision { open, in, out };

/// Minimum over completions of the decisions: sum of capacities of the
/// elements put in the cut. Every open element costs log(w) + tie_cost.
double constrained_cut(const TensorNetworkGraph& g, const Partition& p,
                       const std::vector<Decision>& decisions, double tie_cost) {
  const std::size_t n = g.num_nodes;
  const std::size_t s = 2 * n;
  const std::size_t t = 2 * n + 1;
  Dinic flow(2 * n + 2);
  double base = 0.0;
  auto capacity = [&](std::size_t element) {
    const double c = std::log(static_cast<double>(g.element_weight(element))) + tie_cost;
    switch (decisions[element]) {
      case Decision::in:
        base += c;
        return 0.0;
      case Decision::out:
        return kInfinity;
      case Decision::open:
        break;
    }
    return c;
  };
  for (std::size_t v = 0; v < n; ++v) {
    flow.add_arc(2 * v, 2 * v + 1, g.cuttable(v) ? capacity(g.edges.size() + v) : kInfinity);
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const double c = capacity(e);
    flow.add_arc(2 * g.edges[e].a + 1, 2 * g.edges[e].b, c);
    flow.add_arc(2 * g.edges[e].b + 1, 2 * g.edges[e].a, c);
  }
  for (Mode m : p.left()) flow.add_arc(s, 2 * g.terminals[static_cast<std::size_t>(m - 1)], kInfinity);
  for (Mode m : p.right()) {
    flow.add_arc(2 * g.terminals[static_cast<std::size_t>(m - 1)] + 1, t, kInfinity);
  }
  const double f = flow.max_flow(s, t);
  return f >= kInfinity / 2 ? kInfinity : base + f;
}

}  // namespace

bool separates(const TensorNetworkGraph& g, const Partition& p,
               const std::vector<std::size_t>& elements) {
  std::vector<bool> edge_gone(g.edges.size(), false);
  std::vector<bool> node_gone(g.num_nodes, false);
  for (auto e : elements) {
    if (e < g.edges.size()) {
      edge_gone[e] = true;
    } else {
      node_gone.at(e - g.edges.size()) = true;
    }
  }
  std::vector<std::vector<std::size_t>> adj(g.num_nodes);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (edge_gone[e]) continue;
    adj[g.edges[e].a].push_back(g.edges[e].b);
    adj[g.edges[e].b].push_back(g.edges[e].a);
  }
  std::vector<bool> seen(g.num_nodes, false);
  std::vector<std::size_t> stack;
  for (Mode m : p.left()) {
    const auto v = g.terminals[static_cast<std::size_t>(m - 1)];
    seen[v] = true;
    stack.push_back(v);
  }
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (node_gone[v]) continue;
    for (auto u : adj[v]) {
      if (!seen[u]) {
        seen[u] = true;
        stack.push_back(u);
      }
    }
  }
  for (Mode m : p.right()) {
    if (seen[g.terminals[static_cast<std::size_t>(m - 1)]]) return false;
  }
  return true;
}

BigInt cut_value(const TensorNetworkGraph& g, const std::vector<std::size_t>& elements) {
  BigInt v = 1;
  for (auto e : elements) v *= g.element_weight(e);
  return v;
}

MinCut min_multiplicative_cut(const TensorNetworkGraph& g, const Partition& p) {
  g.validate();
  if (p.total_modes() != g.num_terminals()) {
    throw InvalidArgument("partition covers " + std::to_string(p.total_modes()) +
                          " modes but the network has " + std::to_string(g.num_terminals()) +
                          " terminals");
  }
  const std::size_t elements = g.num_elements();
  std::vector<Decision> decisions(elements, Decision::open);
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    if (!g.cuttable(v)) decisions[g.edges.size() + v] = Decision::out;
  }

  // The per-element surcharge must stay below half the log-gap between the
  // optimum P and any larger integer product, which is at least 1/(2P).
  const double plain = constrained_cut(g, p, decisions, 0.0);
  const double optimum_bound = std::exp(plain) + 1.0;
  const double tie_cost = 0.25 / (optimum_bound * static_cast<double>(elements + 1));
  if (tie_cost < 1e-12 * std::max(1.0, plain)) {
    throw InvalidArgument("cut product too large for exact tie-breaking");
  }
  const double best = constrained_cut(g, p, decisions, tie_cost);
  const double slack = tie_cost / 4;

  for (std::size_t e = 0; e < elements; ++e) {
    if (decisions[e] != Decision::open) continue;
    decisions[e] = Decision::in;
    if (constrained_cut(g, p, decisions, tie_cost) > best + slack) decisions[e] = Decision::out;
  }

  MinCut cut;
  for (std::size_t e = 0; e < elements; ++e) {
    if (decisions[e] == Decision::in) cut.elements.push_back(e);
  }
  if (!separates(g, p, cut.elements)) {
    throw InvariantError("min-cut search returned a non-separating set");
  }
  cut.value = cut_value(g, cut.elements);
  return cut;
}

WidthAdvice width_advisor(const Architecture& base, const std::vector<Partition>& targets,
                          int budget) {
  base.validate();
  if (targets.empty()) throw InvalidArgument("width advisor needs at least one target partition");
  const int layers = static_cast<int>(base.schedule.num_layers());
  if (budget < layers) {
    throw InvalidArgument("budget " + std::to_string(budget) + " cannot give " +
                          std::to_string(layers) + " layers width >= 1");
  }
  WidthAdvice best;
  bool have = false;
  std::vector<int> w(static_cast<std::size_t>(layers), 1);
  Architecture arch = base;
  // lexicographic enumeration of all w >= 1 with sum(w) <= budget
  while (true) {
    arch.widths = w;
    const auto g = build_tensor_network(arch);
    std::vector<BigInt> cuts;
    BigInt objective = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      cuts.push_back(min_multiplicative_cut(g, targets[k]).value);
      if (k == 0 || cuts.back() < objective) objective = cuts.back();
    }
    ++best.assignments_checked;
    if (!have || objective > best.objective) {
      best.widths = w;
      best.objective = objective;
      best.target_cuts = cuts;
      have = true;
    }
    int sum = 0;
    for (int x : w) sum += x;
    int k = layers - 1;
    while (k >= 0) {
      if (sum < budget) {
        ++w[static_cast<std::size_t>(k)];
        break;
      }
      sum -= w[static_cast<std::size_t>(k)] - 1;
      w[static_cast<std::size_t>(k)] = 1;
      --k;
    }
    if (k < 0) break;
  }
  return best;
}

}  // namespace htcirc
