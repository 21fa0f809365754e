#include "htcirc/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "htcirc/errors.hpp"

namespace htcirc {

namespace {

// sub-experiment streams of one seed
constexpr std::uint64_t kStreamBaseline = 0xB0000000ULL << 32;
constexpr std::uint64_t kStreamEmbedding = 0xB1000000ULL << 32;
constexpr std::uint64_t kStreamShallow = 0xB2000000ULL << 32;
constexpr std::uint64_t kStreamLeft = 0xB3000000ULL << 32;
constexpr std::uint64_t kStreamRight = 0xB4000000ULL << 32;
constexpr std::uint64_t kStreamMixed = 0xB5000000ULL << 32;
constexpr std::uint64_t kStreamDegenerate = 0xB6000000ULL << 32;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
  auto rng = make_rng(seed, stream);
  return rng();
}

int int_power(int base, int exp) {
  long long v = 1;
  for (int k = 0; k < exp; ++k) v *= base;
  return static_cast<int>(v);
}

}  // namespace

RankReport rank_spectrum(const DenseTensor& t, const std::vector<Partition>& partitions,
                         double tol, std::string model) {
  RankReport report{std::move(model), {}};
  for (const auto& p : partitions) {
    const Matrix m = matricize(t, p);
    report.records.push_back({p, static_cast<std::size_t>(m.rows()),
                              static_cast<std::size_t>(m.cols()), numerical_rank(m, tol), tol});
  }
  return report;
}

int separation_rank(const CircuitSpec& c, const Partition& p, double tol, std::uint64_t guard) {
  return numerical_rank(matricize(grid_tensor(c, guard), p), tol);
}

std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t draw) { return sub_seed(seed, draw + 1); }

double relative_error(const DenseTensor& a, const DenseTensor& b) {
  return max_abs_difference(a, b) / (1.0 + max_abs_entry(a));
}

int RankSurvey::max_rank(std::size_t partition) const {
  int best = 0;
  for (const auto& row : ranks) best = std::max(best, row.at(partition));
  return best;
}

std::size_t RankSurvey::count_at_least(std::size_t partition, int value) const {
  return static_cast<std::size_t>(std::count_if(
      ranks.begin(), ranks.end(), [&](const auto& row) { return row.at(partition) >= value; }));
}

std::size_t RankSurvey::count_above(std::size_t partition, int value) const {
  return static_cast<std::size_t>(std::count_if(
      ranks.begin(), ranks.end(), [&](const auto& row) { return row.at(partition) > value; }));
}

RankSurvey survey_ranks(const TensorSampler& sampler, const std::vector<Partition>& partitions,
                        int draws, std::uint64_t seed, double tol) {
  if (draws < 1) throw InvalidArgument("draw count must be >= 1");
  RankSurvey s{partitions, {}};
  for (int d = 0; d < draws; ++d) {
    const DenseTensor t = sampler(draw_seed(seed, static_cast<std::uint64_t>(d)));
    std::vector<int> row;
    for (const auto& p : partitions) row.push_back(numerical_rank(matricize(t, p), tol));
    s.ranks.push_back(std::move(row));
  }
  return s;
}

TensorSampler circuit_sampler(const Architecture& arch, std::uint64_t guard) {
  arch.validate();
  check_grid_guard(arch.positions, arch.grid_size, guard);
  return [arch, guard](std::uint64_t seed) { return grid_tensor(sample_circuit(arch, seed), guard); };
}

CpParams rectifier_shallow_instance(int positions, int grid_size) {
  if (positions < 1 || grid_size < 1) throw InvalidArgument("N and M must be >= 1");
  CpParams p;
  p.order = positions;
  p.mode_length = grid_size;
  const double step = grid_size > 1 ? 1.0 / (grid_size - 1) : 0.0;
  std::vector<double> a(static_cast<std::size_t>(grid_size)), b(a.size());
  for (int d = 0; d < grid_size; ++d) {
    a[static_cast<std::size_t>(d)] = 0.3 + 0.9 * d * step;
    b[static_cast<std::size_t>(d)] = -0.5 + 1.3 * d * step;
  }
  p.vectors = {a, b};
  p.weights = {1.0, -0.7};
  p.validate();
  return p;
}

RectifierConstruction rectifier_construction(int positions, int grid_size, OperatorSpec op,
                                             std::uint64_t guard, double tol) {
  check_grid_guard(positions, grid_size, guard);
  RectifierConstruction r;
  r.shallow = rectifier_shallow_instance(positions, grid_size);
  const auto deep = max_pooling_deep_equivalent(r.shallow);
  const DenseTensor deep_tensor = generalized_generate(deep, op);
  const DenseTensor shallow_tensor = grid_tensor(shallow_circuit(r.shallow, op), guard);
  r.deep_width = deep.width(deep.tree().root());
  r.rank = numerical_rank(
      matricize(deep_tensor, resolve_partition(CanonicalPartition::even_odd(), positions)),
      tol);
  r.rank_bound = grid_size;
  r.relative_error = relative_error(shallow_tensor, deep_tensor);
  return r;
}

DepthEfficiencyResult depth_efficiency_experiment(int positions, int grid_size, int width,
                                                  int shallow_r0_max, OperatorSpec op,
                                                  const RunSettings& run) {
  check_grid_guard(positions, grid_size, run.guard);
  if (shallow_r0_max < 0) throw InvalidArgument("shallow_r0_max must be >= 0");
  DepthEfficiencyResult r;
  r.positions = positions;
  r.grid_size = grid_size;
  r.width = width;
  r.op = op;
  r.partition = resolve_partition(CanonicalPartition::even_odd(), positions);
  r.target_rank = int_power(grid_size, positions / 2);

  const auto shape = HierarchicalShape::uniform(perfect_binary_tree(positions), grid_size, width);
  const auto deep = survey_ranks(
      [&](std::uint64_t seed) {
        const auto p = sample_hierarchical_params(shape, seed);
        return op.is_arithmetic() ? hierarchical_generate(p) : generalized_generate(p, op);
      },
      {r.partition}, run.draws, run.seed, run.tolerance);
  for (const auto& row : deep.ranks) r.ranks.push_back(row[0]);
  r.achieved = deep.count_at_least(0, r.target_rank);
  r.implied_shallow_r0 = deep.max_rank(0);

  for (int r0 = 1; r0 <= shallow_r0_max; ++r0) {
    const CpShape cp{positions, grid_size, r0};
    const auto shallow = survey_ranks(
        [&](std::uint64_t seed) {
          const auto p = sample_cp_params(cp, seed);
          return op.is_arithmetic() ? cp_generate(p) : grid_tensor(shallow_circuit(p, op), run.guard);
        },
        {r.partition}, run.draws, sub_seed(run.seed, kStreamShallow + static_cast<std::uint64_t>(r0)),
        run.tolerance);
    r.shallow_max_rank.push_back(shallow.max_rank(0));
  }
  if (!op.is_arithmetic()) r.construction = rectifier_construction(positions, grid_size, op, run.guard, run.tolerance);
  return r;
}

SurveyResult architecture_survey(const Architecture& arch, const std::vector<Partition>& partitions,
                                 const RunSettings& run) {
  SurveyResult r{survey_ranks(circuit_sampler(arch, run.guard), partitions, run.draws, run.seed,
                              run.tolerance),
                 {}};
  std::optional<TensorNetworkGraph> net;
  if (!arch.schedule.has_overlaps()) net = build_tensor_network(arch);
  for (std::size_t k = 0; k < partitions.size(); ++k) {
    PartitionSummary s{partitions[k], r.survey.max_rank(k), 0, std::nullopt, 0};
    s.count_at_max = r.survey.count_at_least(k, s.max_rank);
    if (net) {
      s.bound = min_multiplicative_cut(*net, partitions[k]).value;
      for (const auto& row : r.survey.ranks) {
        if (BigInt(row[k]) > *s.bound) ++s.exceeding;
      }
    }
    r.summaries.push_back(std::move(s));
  }
  return r;
}

OverlapResult overlap_experiment(int positions, int grid_size, int window, int width,
                                 const Partition& partition, int embedding_checks,
                                 const RunSettings& run) {
  check_grid_guard(positions, grid_size, run.guard);
  if (embedding_checks < 0) throw InvalidArgument("embedding check count must be >= 0");
  OverlapResult r;
  r.positions = positions;
  r.grid_size = grid_size;
  r.window = window;
  r.width = width;
  r.partition = partition;

  const auto overlapping = overlapping_architecture(positions, grid_size, window, width);
  const auto baseline = deep_architecture(positions, grid_size, width);
  r.overlapping = survey_ranks(circuit_sampler(overlapping, run.guard), {partition}, run.draws,
                               run.seed, run.tolerance);
  r.baseline = survey_ranks(circuit_sampler(baseline, run.guard), {partition}, run.draws,
                            sub_seed(run.seed, kStreamBaseline), run.tolerance);
  r.ceiling = min_multiplicative_cut(build_tensor_network(baseline), partition).value;
  r.exceeds = BigInt(r.overlapping.max_rank(0)) > r.ceiling;

  const auto embed_seed = sub_seed(run.seed, kStreamEmbedding);
  for (int d = 0; d < embedding_checks; ++d) {
    const auto c = sample_circuit(baseline, draw_seed(embed_seed, static_cast<std::uint64_t>(d)));
    const auto embedded = embed_in_overlapping(map_to_decomposition(c));
    r.embedding_relative_error =
        std::max(r.embedding_relative_error,
                 relative_error(grid_tensor(c, run.guard), grid_tensor(embedded, run.guard)));
  }
  r.embedding_checks = static_cast<std::size_t>(embedding_checks);
  return r;
}

std::vector<MinCutCheck> verify_min_cut_theorem(const Architecture& arch,
                                                const std::vector<Partition>& partitions,
                                                const RunSettings& run) {
  const auto net = build_tensor_network(arch);
  const auto survey = survey_ranks(circuit_sampler(arch, run.guard), partitions, run.draws,
                                   run.seed, run.tolerance);
  std::vector<MinCutCheck> out;
  for (std::size_t k = 0; k < partitions.size(); ++k) {
    MinCutCheck c{partitions[k], min_multiplicative_cut(net, partitions[k]), survey.max_rank(k), 0,
                  false};
    for (const auto& row : survey.ranks) {
      if (BigInt(row[k]) > c.cut.value) ++c.exceeding;
    }
    c.matched = BigInt(c.max_rank) == c.cut.value;
    out.push_back(std::move(c));
  }
  return out;
}

MixedParams degenerate_mixture(const HierarchicalParams& left, const HierarchicalShape& right) {
  right.validate();
  std::vector<std::vector<Matrix>> mixing(right.tree.num_nodes());
  for (std::size_t v = 0; v < right.tree.num_nodes(); ++v) {
    for (auto c : right.tree.node(v).children) {
      mixing[v].push_back(Matrix::Zero(right.widths[v], right.widths[c]));
    }
  }
  std::vector<double> zeros(static_cast<std::size_t>(right.widths[right.tree.root()]), 0.0);
  MixedParams p{left, HierarchicalParams{right, std::move(mixing), std::move(zeros)}, {}};
  p.validate();
  return p;
}

namespace {

int width_needed(const ModeTree& tree, int grid_size, int from, int target, const Partition& p) {
  for (int w = from;; ++w) {
    const auto g = build_tensor_network(HierarchicalShape::uniform(tree, grid_size, w));
    if (min_multiplicative_cut(g, p).value >= target) return w;
    if (w >= std::max(from, target)) {
      throw InvariantError("uniform width " + std::to_string(w) +
                           " still cannot reach rank " + std::to_string(target));
    }
  }
}

}  // namespace

MixtureResult mixture_experiment(const ModeTree& left, const ModeTree& right, int grid_size,
                                 int width, const std::vector<Partition>& partitions,
                                 const RunSettings& run) {
  if (left.num_modes() != right.num_modes()) {
    throw InvalidArgument("mixture trees must cover the same modes");
  }
  check_grid_guard(static_cast<int>(left.num_modes()), grid_size, run.guard);
  const auto ls = HierarchicalShape::uniform(left, grid_size, width);
  const auto rs = HierarchicalShape::uniform(right, grid_size, width);

  MixtureResult r;
  r.grid_size = grid_size;
  r.width = width;
  r.exchange = common_nodes(left, right, true);

  const auto a = survey_ranks(
      [&](std::uint64_t s) { return hierarchical_generate(sample_hierarchical_params(ls, s)); },
      partitions, run.draws, sub_seed(run.seed, kStreamLeft), run.tolerance);
  const auto b = survey_ranks(
      [&](std::uint64_t s) { return hierarchical_generate(sample_hierarchical_params(rs, s)); },
      partitions, run.draws, sub_seed(run.seed, kStreamRight), run.tolerance);
  const auto m = survey_ranks(
      [&](std::uint64_t s) { return mixed_generate(sample_mixed_params(ls, rs, r.exchange, s)); },
      partitions, run.draws, sub_seed(run.seed, kStreamMixed), run.tolerance);

  for (std::size_t k = 0; k < partitions.size(); ++k) {
    MixtureRow row{partitions[k], a.max_rank(k), b.max_rank(k), m.max_rank(k), false, width, width};
    row.exceeds_both = row.mixed_max > std::max(row.left_max, row.right_max);
    if (row.mixed_max > row.left_max) {
      row.left_width_needed = width_needed(left, grid_size, width, row.mixed_max, partitions[k]);
    }
    if (row.mixed_max > row.right_max) {
      row.right_width_needed = width_needed(right, grid_size, width, row.mixed_max, partitions[k]);
    }
    if (row.exceeds_both) ++r.winning_partitions;
    r.rows.push_back(std::move(row));
  }

  const auto single = sample_hierarchical_params(ls, sub_seed(run.seed, kStreamDegenerate));
  r.degenerate_relative_error =
      relative_error(hierarchical_generate(single), mixed_generate(degenerate_mixture(single, rs)));
  return r;
}

}  // namespace htcirc
