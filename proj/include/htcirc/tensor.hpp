#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace htcirc {

using Matrix = Eigen::MatrixXd;
using Shape = std::vector<std::size_t>;

/// Tensor modes are labelled 1..N throughout the library.
using Mode = int;

inline constexpr double kDefaultRankTolerance = 1e-9;
/// Used by random-draw experiments, whose generic matricizations are often
/// conditioned beyond 1e8.
inline constexpr double kExperimentRankTolerance = 1e-12;

/// Order-N dense array of finite doubles, row-major (last mode fastest).
/// Immutable once constructed.
class DenseTensor {
 public:
  /// Zero tensor of the given shape.
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> entries);

  static DenseTensor vector(std::vector<double> entries);
  static DenseTensor matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  std::size_t order() const { return shape_.size(); }
  const Shape& shape() const { return shape_; }
  std::size_t mode_length(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return entries_.size(); }
  std::span<const double> entries() const { return entries_; }

  double operator[](std::size_t flat) const { return entries_[flat]; }
  double at(std::span<const std::size_t> index) const;

  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;

  bool operator==(const DenseTensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> entries_;
};

/// Two-way split (I, J) of the modes {1..N}. Both sides are kept sorted.
class Partition {
 public:
  /// J is the complement of `left` in {1..total_modes}.
  Partition(std::size_t total_modes, std::vector<Mode> left);
  Partition(std::size_t total_modes, std::vector<Mode> left, std::vector<Mode> right);

  std::size_t total_modes() const { return total_modes_; }
  const std::vector<Mode>& left() const { return left_; }
  const std::vector<Mode>& right() const { return right_; }

  Partition swapped() const { return Partition(total_modes_, right_, left_); }

  /// "{1,3}|{2,4}"
  std::string to_string() const;

  bool operator==(const Partition&) const = default;

 private:
  std::size_t total_modes_;
  std::vector<Mode> left_;
  std::vector<Mode> right_;
};

/// Every bipartition of {1..N} with mode 1 on the left side (2^(N-1) - 1 of them).
std::vector<Partition> all_partitions(std::size_t total_modes);

enum class Activation { identity, relu };
enum class Pooling { product, max, average };

/// Activation-pooling pair: g(a, b) = P{sigma(a), sigma(b)}.
struct OperatorSpec {
  Activation activation = Activation::identity;
  Pooling pooling = Pooling::product;

  static OperatorSpec arithmetic() { return {}; }
  static OperatorSpec rectifier_max() { return {Activation::relu, Pooling::max}; }
  static OperatorSpec rectifier_average() { return {Activation::relu, Pooling::average}; }

  bool is_arithmetic() const {
    return activation == Activation::identity && pooling == Pooling::product;
  }

  double activate(double x) const;
  /// Pools already-activated values. Average is the plain mean over the window.
  double pool(std::span<const double> activated) const;
  /// g applied to raw values: activate each, then pool.
  double apply(std::span<const double> raw) const;
  double apply(double a, double b) const;

  std::string to_string() const;
  bool operator==(const OperatorSpec&) const = default;
};

std::string to_string(Activation a);
std::string to_string(Pooling p);
Activation activation_from_string(const std::string& s);
Pooling pooling_from_string(const std::string& s);

DenseTensor outer_product(const DenseTensor& a, const DenseTensor& b);

DenseTensor generalized_outer_product(const DenseTensor& a, const DenseTensor& b,
                                      const OperatorSpec& op);

/// n-ary form: entry = P{sigma(t_1[i_1]), ..., sigma(t_k[i_k])}. With the
/// arithmetic operator this multiplies left to right, matching a fold of
/// outer_product exactly.
DenseTensor generalized_outer_product(std::span<const DenseTensor> factors,
                                      const OperatorSpec& op);

/// Reorders modes so that result axis k is input axis order[k] (0-based axes).
DenseTensor permute_modes(const DenseTensor& t, std::span<const std::size_t> order);

/// Rows range over the modes of I (ascending, row-major), columns over J.
Matrix matricize(const DenseTensor& t, const Partition& p);

/// Singular values above tol * sigma_max * max(rows, cols).
int numerical_rank(const Matrix& m, double tol = kDefaultRankTolerance);

/// max|a - b| <= rel_tol * (1 + max|a|). Normalised by `a`, so the relation is
/// not exactly symmetric when the magnitudes of a and b differ.
bool tensors_close(const DenseTensor& a, const DenseTensor& b, double rel_tol);

double max_abs_difference(const DenseTensor& a, const DenseTensor& b);
double max_abs_entry(const DenseTensor& t);

}  // namespace htcirc
