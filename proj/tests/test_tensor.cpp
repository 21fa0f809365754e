#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "htcirc/errors.hpp"
#include "htcirc/tensor.hpp"
#include "oracles.hpp"

using namespace htcirc;

namespace {

DenseTensor random_tensor(const Shape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::size_t size = 1;
  for (auto s : shape) size *= s;
  std::vector<double> e(size);
  for (auto& v : e) v = n(rng);
  return DenseTensor(shape, e);
}

std::vector<double> flat(const DenseTensor& t) { return {t.entries().begin(), t.entries().end()}; }

}  // namespace

TEST(DenseTensor, RejectsInvalidShapesAndEntries) {
  EXPECT_THROW(DenseTensor(Shape{}), InvalidArgument);
  EXPECT_THROW(DenseTensor(Shape{2, 0}), InvalidArgument);
  EXPECT_THROW(DenseTensor(Shape{2, 2}, {1, 2, 3}), InvalidArgument);
  EXPECT_THROW(DenseTensor(Shape{2}, {1, std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
  EXPECT_THROW(DenseTensor(Shape{1}, {std::numeric_limits<double>::infinity()}), InvalidArgument);
}

TEST(DenseTensor, FlatAndMultiIndexAreRowMajor) {
  DenseTensor t(Shape{2, 3, 4});
  std::vector<std::size_t> idx{1, 2, 3};
  EXPECT_EQ(t.flat_index(idx), 1u * 12 + 2u * 4 + 3u);
  EXPECT_EQ(t.multi_index(23), idx);
}

TEST(Partition, RejectsOverlapsGapsAndEmptySides) {
  EXPECT_THROW(Partition(4, {1, 2}, {2, 3, 4}), InvalidArgument);
  EXPECT_THROW(Partition(4, {1}, {2, 3}), InvalidArgument);
  EXPECT_THROW(Partition(3, {1, 2, 3}), InvalidArgument);
  Partition p(4, {3, 1});
  EXPECT_EQ(p.left(), (std::vector<Mode>{1, 3}));
  EXPECT_EQ(p.right(), (std::vector<Mode>{2, 4}));
  EXPECT_EQ(p.to_string(), "{1,3}|{2,4}");
}

TEST(Partition, AllPartitionsCountsAndKeepsModeOneLeft) {
  const auto ps = all_partitions(6);
  EXPECT_EQ(ps.size(), 31u);
  for (const auto& p : ps) EXPECT_EQ(p.left().front(), 1);
}

TEST(OuterProduct, VectorTimesVector) {
  const auto r = outer_product(DenseTensor::vector({1, 2}), DenseTensor::vector({3, 4}));
  EXPECT_EQ(r.shape(), (Shape{2, 2}));
  EXPECT_EQ(flat(r), (std::vector<double>{3, 4, 6, 8}));
}

TEST(OuterProduct, OrderThreeTimesOrderFourIsOrderSeven) {
  std::mt19937_64 rng(1);
  const auto a = random_tensor({2, 3, 2}, rng);
  const auto b = random_tensor({2, 2, 1, 3}, rng);
  const auto r = outer_product(a, b);
  EXPECT_EQ(r.order(), 7u);
  EXPECT_EQ(r.shape(), (Shape{2, 3, 2, 2, 2, 1, 3}));
  EXPECT_EQ(r, oracle::outer(a, b));
}

TEST(OuterProduct, ZeroFactorGivesZero) {
  std::mt19937_64 rng(2);
  const auto r = outer_product(random_tensor({3, 2}, rng), DenseTensor(Shape{2, 2}));
  for (double v : r.entries()) EXPECT_EQ(v, 0.0);
}

TEST(OuterProduct, AssociativeAndBilinear) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_tensor({2, 3}, rng);
    const auto b = random_tensor({3}, rng);
    const auto c = random_tensor({2, 2}, rng);
    const auto left = outer_product(outer_product(a, b), c);
    const auto right = outer_product(a, outer_product(b, c));
    EXPECT_TRUE(tensors_close(left, right, 1e-12));

    const auto b2 = random_tensor({3}, rng);
    std::vector<double> sum(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) sum[k] = 2.0 * b[k] - 0.5 * b2[k];
    const auto lhs = outer_product(a, DenseTensor::vector(sum));
    const auto x = outer_product(a, b);
    const auto y = outer_product(a, b2);
    std::vector<double> rhs(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) rhs[k] = 2.0 * x[k] - 0.5 * y[k];
    EXPECT_TRUE(tensors_close(lhs, DenseTensor(x.shape(), rhs), 1e-12));
  }
}

TEST(GeneralizedOuterProduct, RectifierMax) {
  const auto r = generalized_outer_product(DenseTensor::vector({1, -2}), DenseTensor::vector({3, -4}),
                                           OperatorSpec::rectifier_max());
  EXPECT_EQ(flat(r), (std::vector<double>{3, 1, 3, 0}));
}

TEST(GeneralizedOuterProduct, ArithmeticReducesToProduct) {
  const auto r = generalized_outer_product(DenseTensor::vector({1, 2}), DenseTensor::vector({3, 4}),
                                           OperatorSpec::arithmetic());
  EXPECT_EQ(flat(r), (std::vector<double>{3, 4, 6, 8}));
}

TEST(GeneralizedOuterProduct, RectifierAverage) {
  const auto r = generalized_outer_product(DenseTensor::vector({2, 0}), DenseTensor::vector({1, 5}),
                                           OperatorSpec::rectifier_average());
  EXPECT_EQ(flat(r), (std::vector<double>{1.5, 3.5, 0.5, 2.5}));
}

TEST(GeneralizedOuterProduct, ArithmeticIsBitIdenticalToOuterProduct) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_tensor({2, static_cast<std::size_t>(1 + trial % 3)}, rng);
    const auto b = random_tensor({3, 2}, rng);
    EXPECT_EQ(generalized_outer_product(a, b, OperatorSpec::arithmetic()), outer_product(a, b));
    const std::vector<DenseTensor> three{a, b, a};
    EXPECT_EQ(generalized_outer_product(three, OperatorSpec::arithmetic()),
              outer_product(outer_product(a, b), a));
  }
}

TEST(OperatorSpec, AverageIsMeanOverWholeWindow) {
  const auto op = OperatorSpec::rectifier_average();
  const std::vector<double> raw{3.0, -1.0, 6.0};
  EXPECT_DOUBLE_EQ(op.apply(raw), 3.0);
  EXPECT_DOUBLE_EQ(OperatorSpec::rectifier_max().apply(raw), 6.0);
  EXPECT_DOUBLE_EQ(OperatorSpec::arithmetic().apply(raw), -18.0);
}

TEST(Matricize, IndexLawExample) {
  std::vector<double> e(8);
  for (int d1 = 0; d1 < 2; ++d1) {
    for (int d2 = 0; d2 < 2; ++d2) {
      for (int d3 = 0; d3 < 2; ++d3) e[d1 * 4 + d2 * 2 + d3] = d1 + 2 * d2 + 4 * d3;
    }
  }
  const Matrix m = matricize(DenseTensor(Shape{2, 2, 2}, e), Partition(3, {2, 3}));
  Matrix expected(4, 2);
  expected << 0, 1, 4, 5, 2, 3, 6, 7;
  EXPECT_EQ(m, expected);
}

TEST(Matricize, EvenOddShape) {
  const Matrix m = matricize(DenseTensor(Shape{3, 3, 3, 3}), Partition(4, {1, 3}));
  EXPECT_EQ(m.rows(), 9);
  EXPECT_EQ(m.cols(), 9);
}

TEST(Matricize, OrderTwoIsTheMatrixItself) {
  const auto t = DenseTensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix expected(2, 3);
  expected << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(matricize(t, Partition(2, {1})), expected);
}

TEST(Matricize, RejectsMismatchedPartition) {
  EXPECT_THROW(matricize(DenseTensor(Shape{2, 2}), Partition(3, {1})), InvalidArgument);
}

TEST(Matricize, AgreesWithIndexLawOracleOnMixedShapes) {
  std::mt19937_64 rng(5);
  const auto t = random_tensor({2, 3, 1, 4, 2}, rng);
  for (const auto& p : all_partitions(5)) {
    EXPECT_EQ(matricize(t, p), oracle::matricize(t, p)) << p.to_string();
    EXPECT_EQ(matricize(t, p.swapped()), oracle::matricize(t, p.swapped())) << p.to_string();
  }
}

TEST(Matricize, SwappedPartitionTransposesAndKeepsRank) {
  std::mt19937_64 rng(6);
  const auto a = random_tensor({2, 2}, rng);
  const auto b = random_tensor({2, 2}, rng);
  std::vector<double> sum(16);
  const auto x = outer_product(a, b);
  const auto y = outer_product(b, a);
  for (std::size_t k = 0; k < 16; ++k) sum[k] = x[k] + y[k];
  const DenseTensor t(x.shape(), sum);
  for (const auto& p : all_partitions(4)) {
    const Matrix m = matricize(t, p);
    EXPECT_EQ(matricize(t, p.swapped()), m.transpose());
    EXPECT_EQ(numerical_rank(m), numerical_rank(matricize(t, p.swapped())));
  }
}

TEST(PermuteModes, MovesAxes) {
  std::mt19937_64 rng(7);
  const auto t = random_tensor({2, 3, 4}, rng);
  const std::vector<std::size_t> order{2, 0, 1};
  const auto r = permute_modes(t, order);
  EXPECT_EQ(r.shape(), (Shape{4, 2, 3}));
  for (const auto& idx : oracle::all_indices(r.shape())) {
    const std::vector<std::size_t> src{idx[1], idx[2], idx[0]};
    EXPECT_EQ(r.at(idx), t.at(src));
  }
}

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(Matrix::Identity(4, 4)), 4);
  const auto t = outer_product(DenseTensor::vector({1, 2}), DenseTensor::vector({3, 4}));
  EXPECT_EQ(numerical_rank(matricize(t, Partition(2, {1}))), 1);
  EXPECT_EQ(numerical_rank(Matrix::Zero(3, 5)), 0);
}

TEST(NumericalRank, RejectsNonFinite) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(numerical_rank(m), InvalidArgument);
}

TEST(NumericalRank, SumOfSeparableTermsIsBoundedByTermCount) {
  std::mt19937_64 rng(8);
  for (int k = 1; k <= 4; ++k) {
    std::vector<double> acc(64, 0.0);
    for (int term = 0; term < k; ++term) {
      DenseTensor prod = random_tensor({2}, rng);
      for (int f = 1; f < 6; ++f) prod = outer_product(prod, random_tensor({2}, rng));
      for (std::size_t i = 0; i < 64; ++i) acc[i] += prod[i];
    }
    const DenseTensor t(Shape(6, 2), acc);
    for (const auto& p : all_partitions(6)) EXPECT_LE(numerical_rank(matricize(t, p)), k);
  }
}

TEST(TensorsClose, Examples) {
  std::mt19937_64 rng(9);
  const auto t = random_tensor({3, 3}, rng);
  EXPECT_TRUE(tensors_close(t, t, 0.0));
  EXPECT_TRUE(tensors_close(DenseTensor(Shape{4}), DenseTensor(Shape{4}, {1e-15, 1e-15, 1e-15, 1e-15}),
                            1e-10));
  EXPECT_FALSE(tensors_close(DenseTensor::matrix(2, 2, {1, 0, 0, 1}),
                             DenseTensor::matrix(2, 2, {1, 0, 0, 2}), 1e-6));
  EXPECT_THROW(tensors_close(DenseTensor(Shape{4}), DenseTensor(Shape{2, 2}), 1e-6), InvalidArgument);
}
