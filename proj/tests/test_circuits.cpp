#include <gtest/gtest.h>

#include "htcirc/analysis.hpp"
#include "htcirc/circuits.hpp"
#include "htcirc/errors.hpp"
#include "oracles.hpp"

using namespace htcirc;

namespace {

CircuitSpec indicator_circuit(int first, int second) {
  Architecture a = shallow_architecture(2, 2, 1);
  a.sharing = WeightSharing::per_position;
  a.conv = ConvKind::generalized;
  CircuitSpec c = sample_circuit(a, 0);
  Matrix k0 = Matrix::Zero(1, 2), k1 = Matrix::Zero(1, 2);
  k0(0, first - 1) = 1.0;
  k1(0, second - 1) = 1.0;
  c.conv = {{{k0, k1}}};
  c.output_weights = {1.0};
  return c;
}

}  // namespace

TEST(InputGrid, PointsAreIncreasingInUnitInterval) {
  const auto g = input_grid(4);
  EXPECT_EQ(g, (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
}

TEST(ForwardEval, ProductOfIndicators) {
  const auto c = indicator_circuit(2, 1);
  for (int d1 = 1; d1 <= 2; ++d1) {
    for (int d2 = 1; d2 <= 2; ++d2) {
      EXPECT_EQ(forward_eval(c, {d1, d2}), (d1 == 2 && d2 == 1) ? 1.0 : 0.0);
    }
  }
  const auto t = grid_tensor(c);
  EXPECT_EQ(t.shape(), (Shape{2, 2}));
  double total = 0.0;
  for (double v : t.entries()) total += v;
  EXPECT_EQ(total, 1.0);
  EXPECT_EQ(t.at(std::vector<std::size_t>{1, 0}), 1.0);
}

TEST(ForwardEval, IdentityKernelsGiveConstantOne) {
  const auto a = deep_architecture(8, 3, 2);
  auto c = sample_circuit(a, 1);
  for (std::size_t k = 0; k < c.conv.size(); ++k) {
    for (auto& slot : c.conv[k]) {
      for (auto& m : slot) {
        m.setZero();
        if (k == 0) m.row(0).setOnes();
        else m(0, 0) = 1.0;
      }
    }
  }
  c.output_weights = {1.0, 0.0};
  const auto t = grid_tensor(c);
  for (double v : t.entries()) EXPECT_EQ(v, 1.0);
}

TEST(ForwardEval, RejectsBadIndices) {
  const auto c = sample_circuit(deep_architecture(4, 2, 2), 1);
  EXPECT_THROW(forward_eval(c, {1, 2, 3, 1}), InvalidArgument);
  EXPECT_THROW(forward_eval(c, {1, 2, 1}), InvalidArgument);
  EXPECT_THROW(forward_eval(c, {0, 1, 1, 1}), InvalidArgument);
}

TEST(ForwardEval, MatchesLayerEquationForEveryVariant) {
  std::vector<Architecture> archs;
  archs.push_back(deep_architecture(4, 3, 2, OperatorSpec::rectifier_average()));
  archs.push_back(shallow_architecture(5, 2, 3, OperatorSpec::rectifier_max()));
  archs.push_back(overlapping_architecture(5, 2, 3, 2));
  Architecture shared = overlapping_architecture(4, 2, 2, 3, OperatorSpec::rectifier_max());
  shared.sharing = WeightSharing::shared;
  archs.push_back(shared);
  Architecture table = deep_architecture(4, 2, 2);
  table.representation = Representation::table;
  archs.push_back(table);
  for (const auto& a : archs) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto c = sample_circuit(a, seed);
      EXPECT_TRUE(tensors_close(oracle::grid(c), grid_tensor(c), 1e-12));
    }
  }
}

TEST(GridTensor, GuardReportsComputedSize) {
  const auto c = sample_circuit(deep_architecture(8, 3, 2), 1);
  try {
    grid_tensor(c, 1000);
    FAIL() << "expected a guard error";
  } catch (const GuardError& e) {
    EXPECT_EQ(e.requested(), 6561u);
    EXPECT_EQ(e.limit(), 1000u);
    EXPECT_NE(std::string(e.what()).find("6561"), std::string::npos);
  }
  EXPECT_NO_THROW(grid_tensor(c, 6561));
}

TEST(Mapping, DeepCircuitMatchesHierarchicalOnPerfectTree) {
  for (int n : {2, 4, 8}) {
    for (int m : {2, 3}) {
      const auto c = sample_circuit(deep_architecture(n, m, 2), static_cast<std::uint64_t>(n * 10 + m));
      const auto p = map_to_decomposition(c);
      EXPECT_EQ(p.tree(), perfect_binary_tree(n));
      EXPECT_TRUE(tensors_close(grid_tensor(c), hierarchical_generate(p), 1e-10));
    }
  }
}

TEST(Mapping, ForwardEntryMatchesDecompositionEntry) {
  const auto c = sample_circuit(deep_architecture(4, 2, 3), 77);
  const auto t = hierarchical_generate(map_to_decomposition(c));
  const std::vector<std::size_t> idx{1, 0, 0, 1};
  EXPECT_NEAR(forward_eval(c, {2, 1, 1, 2}), t.at(idx), 1e-12 * (1 + max_abs_entry(t)));
}

TEST(Mapping, NonUniformWidthsAndMirrorSchedule) {
  PoolingLayer first{{{1, 8}, {2, 7}, {3, 6}, {4, 5}}, 2};
  PoolingLayer second{{{1, 2}, {3, 4}}, 2};
  PoolingLayer third{{{1, 2}}, 2};
  Architecture a = deep_architecture(8, 2, 2);
  a.schedule = PoolingSchedule(8, {first, second, third});
  a.widths = {3, 2, 4};
  const auto c = sample_circuit(a, 5);
  EXPECT_TRUE(tensors_close(grid_tensor(c), hierarchical_generate(map_to_decomposition(c)), 1e-10));
}

TEST(Mapping, ShallowCircuitIsCp) {
  for (int r0 : {1, 3}) {
    const auto c = sample_circuit(shallow_architecture(5, 3, r0), 8);
    const auto p = map_to_cp(c);
    EXPECT_EQ(p.terms(), r0);
    EXPECT_TRUE(tensors_close(grid_tensor(c), cp_generate(p), 1e-10));
    EXPECT_TRUE(tensors_close(grid_tensor(c), hierarchical_generate(map_to_decomposition(c)), 1e-10));
  }
}

TEST(Mapping, ShallowCircuitFromCpRoundTrips) {
  const auto p = sample_cp_params({4, 3, 2}, 3);
  const auto c = shallow_circuit(p);
  EXPECT_TRUE(tensors_close(cp_generate(p), grid_tensor(c), 1e-12));
  const auto back = map_to_cp(c);
  EXPECT_EQ(back.vectors, p.vectors);
  EXPECT_EQ(back.weights, p.weights);
}

TEST(Mapping, RejectsOverlapsAndTables) {
  EXPECT_THROW(map_to_decomposition(sample_circuit(overlapping_architecture(4, 2, 2, 2), 1)),
               InvalidArgument);
  Architecture table = deep_architecture(4, 2, 2);
  table.representation = Representation::table;
  EXPECT_THROW(map_to_decomposition(sample_circuit(table, 1)), InvalidArgument);
  EXPECT_THROW(map_to_cp(sample_circuit(deep_architecture(4, 2, 2), 1)), InvalidArgument);
}

TEST(Mapping, RectifierCircuitMatchesGeneralizedDecomposition) {
  for (const auto& op : {OperatorSpec::rectifier_max(), OperatorSpec::rectifier_average()}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto c = sample_circuit(deep_architecture(4, 2, 2, op), seed);
      EXPECT_TRUE(tensors_close(grid_tensor(c), generalized_generate(map_to_decomposition(c), op), 1e-10));
    }
  }
}

TEST(Overlapping, LengthShrinksByWindowMinusOne) {
  const auto a = overlapping_architecture(7, 2, 3, 2);
  EXPECT_EQ(a.schedule.num_layers(), 3u);
  EXPECT_EQ(a.schedule.output_length(0), 5u);
  EXPECT_EQ(a.schedule.output_length(1), 3u);
  EXPECT_EQ(a.schedule.output_length(2), 1u);
  EXPECT_THROW(overlapping_architecture(8, 2, 3, 2), InvalidArgument);
  EXPECT_THROW(overlapping_architecture(8, 2, 9, 2), InvalidArgument);
}

TEST(Overlapping, TwoPositionsIsASingleWindow) {
  const auto o = overlapping_architecture(2, 3, 2, 2);
  const auto d = deep_architecture(2, 3, 2);
  EXPECT_EQ(o.schedule.num_layers(), 1u);
  EXPECT_EQ(o.schedule.layer(0).windows, d.schedule.layer(0).windows);
  const auto c = sample_circuit(o, 4);
  const auto e = sample_circuit(d, 4);
  EXPECT_EQ(grid_tensor(c), grid_tensor(e));
}

TEST(Overlapping, EmbeddingReproducesNonOverlappingCircuit) {
  for (int n : {2, 4, 8}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto base = sample_circuit(deep_architecture(n, 2, 2), seed);
      const auto params = map_to_decomposition(base);
      const auto embedded = embed_in_overlapping(params);
      EXPECT_TRUE(embedded.arch.schedule.has_overlaps() || n == 2);
      EXPECT_EQ(embedded.arch.schedule, PoolingSchedule::overlapping(n, 2));
      EXPECT_TRUE(tensors_close(grid_tensor(base), grid_tensor(embedded), 1e-10));
    }
  }
}

TEST(Overlapping, EmbeddingRequiresContiguousBinaryTree) {
  const auto mirrored = HierarchicalShape::uniform(dilation_tree(4, {1, 0}), 2, 2);
  EXPECT_THROW(embed_in_overlapping(sample_hierarchical_params(mirrored, 1)), InvalidArgument);
}

TEST(Architecture, ValidationNamesTheProblem) {
  Architecture a = deep_architecture(4, 2, 2);
  a.widths = {2};
  EXPECT_THROW(a.validate(), InvalidArgument);
  a = deep_architecture(4, 2, 2);
  a.widths = {2, 0};
  EXPECT_THROW(a.validate(), InvalidArgument);
  auto c = sample_circuit(deep_architecture(4, 2, 2), 1);
  c.output_weights.pop_back();
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(SeparationRank, SeparableAndSumOfTwo) {
  const auto halves = resolve_partition(CanonicalPartition::contiguous_halves(), 4);
  EXPECT_EQ(separation_rank(sample_circuit(shallow_architecture(4, 3, 1), 2), halves), 1);
  EXPECT_EQ(separation_rank(sample_circuit(shallow_architecture(4, 3, 2), 2), halves), 2);
  const auto ws = resolve_partition(CanonicalPartition::window_splitting(1), 8);
  EXPECT_EQ(separation_rank(sample_circuit(deep_architecture(8, 2, 2), 3), ws, kExperimentRankTolerance),
            16);
}
