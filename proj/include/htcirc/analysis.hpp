#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "htcirc/circuits.hpp"
#include "htcirc/decomp.hpp"
#include "htcirc/network.hpp"
#include "htcirc/structure.hpp"
#include "htcirc/tensor.hpp"

namespace htcirc {

struct RankRecord {
  Partition partition;
  std::size_t rows = 0;
  std::size_t cols = 0;
  int rank = 0;
  double tolerance = 0.0;
};

struct RankReport {
  std::string model;
  std::vector<RankRecord> records;
};

RankReport rank_spectrum(const DenseTensor& t, const std::vector<Partition>& partitions,
                         double tol = kDefaultRankTolerance, std::string model = {});

/// Rank of the grid tensor's matricization. For arithmetic circuits this is
/// the separation rank of the realized function.
int separation_rank(const CircuitSpec& c, const Partition& p, double tol = kDefaultRankTolerance,
                    std::uint64_t guard = kDefaultGridGuard);

/// Seed of draw `draw` within an experiment seeded with `seed`.
std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t draw);

/// max|a - b| / (1 + max|a|)
double relative_error(const DenseTensor& a, const DenseTensor& b);

/// Matricization ranks of independent draws, ranks[draw][partition].
struct RankSurvey {
  std::vector<Partition> partitions;
  std::vector<std::vector<int>> ranks;

  std::size_t draws() const { return ranks.size(); }
  int max_rank(std::size_t partition) const;
  std::size_t count_at_least(std::size_t partition, int value) const;
  std::size_t count_above(std::size_t partition, int value) const;
};

using TensorSampler = std::function<DenseTensor(std::uint64_t seed)>;

/// Draw d is sampler(draw_seed(seed, d)); draws run in order.
RankSurvey survey_ranks(const TensorSampler& sampler, const std::vector<Partition>& partitions,
                        int draws, std::uint64_t seed, double tol = kExperimentRankTolerance);

struct RunSettings {
  int draws = 200;
  std::uint64_t seed = 0;
  double tolerance = kExperimentRankTolerance;
  std::uint64_t guard = kDefaultGridGuard;
};

/// Grid tensors of random circuits with the given architecture.
TensorSampler circuit_sampler(const Architecture& arch, std::uint64_t guard = kDefaultGridGuard);

// ---------------------------------------------------------------------------

struct RectifierConstruction {
  CpParams shallow;           // the shallow network it replicates
  int deep_width = 0;
  int rank = 0;               // even-odd rank of the constructed deep tensor
  int rank_bound = 0;         // M
  double relative_error = 0.0;  // deep construction vs shallow network
};

/// Two shallow rectifier channels whose relu'd vectors share one ordering, so
/// the max-pooled output depends only on the largest grid index present.
CpParams rectifier_shallow_instance(int positions, int grid_size);
RectifierConstruction rectifier_construction(int positions, int grid_size, OperatorSpec op,
                                             std::uint64_t guard = kDefaultGridGuard,
                                             double tol = kExperimentRankTolerance);

struct DepthEfficiencyResult {
  int positions = 0;
  int grid_size = 0;
  int width = 0;
  OperatorSpec op;
  Partition partition{2, {1}};
  int target_rank = 0;  // M^{N/2}
  std::vector<int> ranks;
  std::size_t achieved = 0;
  int implied_shallow_r0 = 0;           // a shallow network needs r0 >= this rank
  std::vector<int> shallow_max_rank;    // index r0 - 1
  std::optional<RectifierConstruction> construction;

  double fraction() const { return ranks.empty() ? 0.0 : double(achieved) / ranks.size(); }
};

/// Deep draws on the perfect binary tree with uniform width, even-odd ranks.
/// Shallow networks with r0 = 1..shallow_r0_max are surveyed for contrast.
DepthEfficiencyResult depth_efficiency_experiment(int positions, int grid_size, int width,
                                                  int shallow_r0_max, OperatorSpec op,
                                                  const RunSettings& run);

struct PartitionSummary {
  Partition partition;
  int max_rank = 0;
  std::size_t count_at_max = 0;
  std::optional<BigInt> bound;   // min-cut when the architecture has one
  std::size_t exceeding = 0;     // draws whose rank exceeded the bound
};

struct SurveyResult {
  RankSurvey survey;
  std::vector<PartitionSummary> summaries;
};

/// Random circuits of `arch`; bounds are min-cuts for non-overlapping schedules.
SurveyResult architecture_survey(const Architecture& arch, const std::vector<Partition>& partitions,
                                 const RunSettings& run);

struct OverlapResult {
  int positions = 0;
  int grid_size = 0;
  int window = 0;
  int width = 0;
  Partition partition{2, {1}};
  RankSurvey overlapping;
  RankSurvey baseline;
  BigInt ceiling;  // baseline min-cut for the partition
  bool exceeds = false;
  std::size_t embedding_checks = 0;
  double embedding_relative_error = 0.0;
};

/// Overlapping stride-1 model vs the baseline size-2 model at equal widths.
/// `embedding_checks` baseline draws are re-expressed as overlapping circuits
/// and their grid tensors compared entrywise.
OverlapResult overlap_experiment(int positions, int grid_size, int window, int width,
                                 const Partition& partition, int embedding_checks,
                                 const RunSettings& run);

struct MinCutCheck {
  Partition partition;
  MinCut cut;
  int max_rank = 0;
  std::size_t exceeding = 0;
  bool matched = false;
};

std::vector<MinCutCheck> verify_min_cut_theorem(const Architecture& arch,
                                                const std::vector<Partition>& partitions,
                                                const RunSettings& run);

struct MixtureRow {
  Partition partition;
  int left_max = 0;
  int right_max = 0;
  int mixed_max = 0;
  bool exceeds_both = false;
  /// Smallest uniform width at which each single tree's min-cut reaches the
  /// mixture's max rank. Width stands in for network size here.
  int left_width_needed = 0;
  int right_width_needed = 0;
};

struct MixtureResult {
  int grid_size = 0;
  int width = 0;
  std::vector<std::vector<Mode>> exchange;
  std::vector<MixtureRow> rows;
  std::size_t winning_partitions = 0;
  /// mixed vs single tree with the right side zeroed and no exchange.
  double degenerate_relative_error = 0.0;
};

MixtureResult mixture_experiment(const ModeTree& left, const ModeTree& right, int grid_size,
                                 int width, const std::vector<Partition>& partitions,
                                 const RunSettings& run);

/// Mixture whose right side contributes nothing: no exchange nodes and zero
/// right-side weights.
MixedParams degenerate_mixture(const HierarchicalParams& left, const HierarchicalShape& right);

}  // namespace htcirc
