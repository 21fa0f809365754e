#include "htcirc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "htcirc/errors.hpp"

namespace htcirc {

GuardError::GuardError(std::uint64_t requested, std::uint64_t limit)
    : std::runtime_error("dense tensor of " + std::to_string(requested) +
                         " entries exceeds the guard of " + std::to_string(limit) + " entries"),
      requested_(requested),
      limit_(limit) {}

namespace {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Shape& shape) {
  if (shape.empty()) throw InvalidArgument("tensor order must be at least 1");
  for (auto len : shape) {
    if (len == 0) throw InvalidArgument("tensor mode lengths must be positive");
  }
}

Shape concat(const Shape& a, const Shape& b) {
  Shape out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  entries_.assign(shape_size(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> entries)
    : shape_(std::move(shape)), entries_(std::move(entries)) {
  check_shape(shape_);
  if (entries_.size() != shape_size(shape_)) {
    throw InvalidArgument("entry count " + std::to_string(entries_.size()) +
                          " does not match the shape (" + std::to_string(shape_size(shape_)) +
                          ")");
  }
  for (double v : entries_) {
    if (!std::isfinite(v)) throw InvalidArgument("tensor entries must be finite");
  }
}

DenseTensor DenseTensor::vector(std::vector<double> entries) {
  Shape shape{entries.size()};
  return DenseTensor(std::move(shape), std::move(entries));
}

DenseTensor DenseTensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> entries) {
  return DenseTensor({rows, cols}, std::move(entries));
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw InvalidArgument("index arity does not match order");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= shape_[k]) throw InvalidArgument("tensor index out of range");
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

std::vector<std::size_t> DenseTensor::multi_index(std::size_t flat) const {
  std::vector<std::size_t> index(shape_.size());
  for (std::size_t k = shape_.size(); k-- > 0;) {
    index[k] = flat % shape_[k];
    flat /= shape_[k];
  }
  return index;
}

double DenseTensor::at(std::span<const std::size_t> index) const {
  return entries_[flat_index(index)];
}

namespace {

std::vector<Mode> complement(std::size_t total_modes, std::vector<Mode> left) {
  std::sort(left.begin(), left.end());
  std::vector<Mode> right;
  for (Mode m = 1; m <= static_cast<Mode>(total_modes); ++m) {
    if (!std::binary_search(left.begin(), left.end(), m)) right.push_back(m);
  }
  return right;
}

}  // namespace

Partition::Partition(std::size_t total_modes, std::vector<Mode> left)
    : Partition(total_modes, left, complement(total_modes, left)) {}

Partition::Partition(std::size_t total_modes, std::vector<Mode> left, std::vector<Mode> right)
    : total_modes_(total_modes), left_(std::move(left)), right_(std::move(right)) {
  std::sort(left_.begin(), left_.end());
  std::sort(right_.begin(), right_.end());
  if (left_.empty() || right_.empty()) throw InvalidArgument("partition sides must be nonempty");
  std::vector<Mode> all;
  std::merge(left_.begin(), left_.end(), right_.begin(), right_.end(), std::back_inserter(all));
  if (all.size() != total_modes_) {
    throw InvalidArgument("partition " + to_string() + " does not cover " +
                          std::to_string(total_modes_) + " modes");
  }
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (all[k] != static_cast<Mode>(k + 1)) {
      throw InvalidArgument("partition " + to_string() + " is not a disjoint cover of 1.." +
                            std::to_string(total_modes_));
    }
  }
}

std::string Partition::to_string() const {
  auto side = [](const std::vector<Mode>& s) {
    std::string out = "{";
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k) out += ',';
      out += std::to_string(s[k]);
    }
    return out + "}";
  };
  return side(left_) + "|" + side(right_);
}

std::vector<Partition> all_partitions(std::size_t total_modes) {
  if (total_modes < 2 || total_modes > 30) {
    throw InvalidArgument("all_partitions needs 2 <= N <= 30");
  }
  std::vector<Partition> out;
  const std::uint64_t free_bits = total_modes - 1;
  // Mode 1 always on the left; mask selects which of modes 2..N join it.
  for (std::uint64_t mask = 0; mask + 1 < (std::uint64_t{1} << free_bits); ++mask) {
    std::vector<Mode> left{1};
    for (std::uint64_t b = 0; b < free_bits; ++b) {
      if (mask & (std::uint64_t{1} << b)) left.push_back(static_cast<Mode>(b + 2));
    }
    out.emplace_back(total_modes, std::move(left));
  }
  return out;
}

double OperatorSpec::activate(double x) const {
  switch (activation) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
  }
  return x;
}

double OperatorSpec::pool(std::span<const double> activated) const {
  if (activated.empty()) throw InvalidArgument("cannot pool an empty window");
  switch (pooling) {
    case Pooling::product: {
      double acc = activated[0];
      for (std::size_t k = 1; k < activated.size(); ++k) acc *= activated[k];
      return acc;
    }
    case Pooling::max: return *std::max_element(activated.begin(), activated.end());
    case Pooling::average: {
      double sum = 0.0;
      for (double v : activated) sum += v;
      return sum / static_cast<double>(activated.size());
    }
  }
  return 0.0;
}

double OperatorSpec::apply(std::span<const double> raw) const {
  // Windows are small; avoid allocating for the common sizes.
  double buf[16];
  std::vector<double> heap;
  double* act = buf;
  if (raw.size() > 16) {
    heap.resize(raw.size());
    act = heap.data();
  }
  for (std::size_t k = 0; k < raw.size(); ++k) act[k] = activate(raw[k]);
  return pool({act, raw.size()});
}

double OperatorSpec::apply(double a, double b) const {
  const double pair[2] = {a, b};
  return apply(pair);
}

std::string to_string(Activation a) {
  return a == Activation::identity ? "identity" : "relu";
}

std::string to_string(Pooling p) {
  switch (p) {
    case Pooling::product: return "product";
    case Pooling::max: return "max";
    case Pooling::average: return "average";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity" || s == "linear") return Activation::identity;
  if (s == "relu") return Activation::relu;
  throw InvalidArgument("unknown activation '" + s + "'");
}

Pooling pooling_from_string(const std::string& s) {
  if (s == "product") return Pooling::product;
  if (s == "max") return Pooling::max;
  if (s == "average" || s == "mean") return Pooling::average;
  throw InvalidArgument("unknown pooling '" + s + "'");
}

std::string OperatorSpec::to_string() const {
  return "(" + htcirc::to_string(activation) + ", " + htcirc::to_string(pooling) + ")";
}

DenseTensor outer_product(const DenseTensor& a, const DenseTensor& b) {
  std::vector<double> out(a.size() * b.size());
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t k = 0;
  for (double x : ea) {
    for (double y : eb) out[k++] = x * y;
  }
  return DenseTensor(concat(a.shape(), b.shape()), std::move(out));
}

DenseTensor generalized_outer_product(const DenseTensor& a, const DenseTensor& b,
                                      const OperatorSpec& op) {
  std::vector<double> out(a.size() * b.size());
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t k = 0;
  for (double x : ea) {
    for (double y : eb) out[k++] = op.apply(x, y);
  }
  return DenseTensor(concat(a.shape(), b.shape()), std::move(out));
}

DenseTensor generalized_outer_product(std::span<const DenseTensor> factors,
                                      const OperatorSpec& op) {
  if (factors.empty()) throw InvalidArgument("generalized product needs at least one factor");
  Shape shape;
  for (const auto& f : factors) shape = concat(shape, f.shape());
  const std::size_t count = shape_size(shape);

  const std::size_t k = factors.size();
  std::vector<std::size_t> idx(k, 0);
  std::vector<double> raw(k);
  std::vector<double> out(count);
  for (std::size_t flat = 0; flat < count; ++flat) {
    for (std::size_t f = 0; f < k; ++f) raw[f] = factors[f][idx[f]];
    out[flat] = op.apply(raw);
    // odometer over factor entries, last factor fastest
    for (std::size_t f = k; f-- > 0;) {
      if (++idx[f] < factors[f].size()) break;
      idx[f] = 0;
    }
  }
  return DenseTensor(std::move(shape), std::move(out));
}

DenseTensor permute_modes(const DenseTensor& t, std::span<const std::size_t> order) {
  const std::size_t n = t.order();
  if (order.size() != n) throw InvalidArgument("permutation length does not match order");
  std::vector<bool> seen(n, false);
  for (auto o : order) {
    if (o >= n || seen[o]) throw InvalidArgument("invalid mode permutation");
    seen[o] = true;
  }
  Shape shape(n);
  for (std::size_t k = 0; k < n; ++k) shape[k] = t.mode_length(order[k]);

  // stride of each input axis
  std::vector<std::size_t> in_stride(n, 1);
  for (std::size_t k = n - 1; k-- > 0;) in_stride[k] = in_stride[k + 1] * t.mode_length(k + 1);

  std::vector<double> out(t.size());
  std::vector<std::size_t> idx(n, 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out[flat] = t[src];
    for (std::size_t k = n; k-- > 0;) {
      src += in_stride[order[k]];
      if (++idx[k] < shape[k]) break;
      src -= in_stride[order[k]] * shape[k];
      idx[k] = 0;
    }
  }
  return DenseTensor(std::move(shape), std::move(out));
}

Matrix matricize(const DenseTensor& t, const Partition& p) {
  if (p.total_modes() != t.order()) {
    throw InvalidArgument("partition over " + std::to_string(p.total_modes()) +
                          " modes applied to an order-" + std::to_string(t.order()) + " tensor");
  }
  std::size_t rows = 1, cols = 1;
  for (Mode m : p.left()) rows *= t.mode_length(m - 1);
  for (Mode m : p.right()) cols *= t.mode_length(m - 1);

  Matrix out(rows, cols);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const auto idx = t.multi_index(flat);
    std::size_t r = 0, c = 0;
    for (Mode m : p.left()) r = r * t.mode_length(m - 1) + idx[m - 1];
    for (Mode m : p.right()) c = c * t.mode_length(m - 1) + idx[m - 1];
    out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t[flat];
  }
  return out;
}

int numerical_rank(const Matrix& m, double tol) {
  if (!m.allFinite()) throw InvalidArgument("numerical_rank: matrix has non-finite entries");
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff =
      tol * sv(0) * static_cast<double>(std::max(m.rows(), m.cols()));
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) ++rank;
  }
  return rank;
}

double max_abs_entry(const DenseTensor& t) {
  double best = 0.0;
  for (double v : t.entries()) best = std::max(best, std::abs(v));
  return best;
}

double max_abs_difference(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw InvalidArgument("tensor shapes differ");
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) best = std::max(best, std::abs(a[k] - b[k]));
  return best;
}

bool tensors_close(const DenseTensor& a, const DenseTensor& b, double rel_tol) {
  return max_abs_difference(a, b) <= rel_tol * (1.0 + max_abs_entry(a));
}

}  // namespace htcirc
