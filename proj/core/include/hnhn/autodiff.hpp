#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "hnhn/hypergraph.hpp"
#include "hnhn/matrix.hpp"
#include "hnhn/rng.hpp"

namespace hnhn {

/// Raised when a forward value or a gradient stops being finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::function<void(Node&)> backward;

  Matrix& grad_buffer() {
    if (grad.empty() && !value.empty()) grad = Matrix(value.rows(), value.cols());
    return grad;
  }
};

}  // namespace detail

/// Handle to a 2-D value in a reverse-mode computation graph. Copies share
/// the underlying node, so a parameter keeps its gradient across uses.
class Tensor {
 public:
  Tensor() = default;

  /// Leaf that collects gradients.
  static Tensor parameter(Matrix value);
  /// Leaf that does not.
  static Tensor constant(Matrix value);

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  /// Zero matrix of the value's shape if nothing has been accumulated yet.
  const Matrix& grad() const { return node_->grad_buffer(); }
  bool requires_grad() const { return node_->requires_grad; }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  double item() const;

  void zero_grad() { node_->grad = Matrix(); }

  bool defined() const { return node_ != nullptr; }
  bool shares_node(const Tensor& other) const { return node_ == other.node_; }

  /// Engine internals, used by op implementations.
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  friend class Tape;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Records differentiable operations in execution order. Backward walks the
/// records in exact reverse order. A tape belongs to one thread.
class Tape {
 public:
  std::size_t size() const { return nodes_.size(); }
  /// Drops all recorded intermediates; parameter gradients are untouched.
  void clear() { nodes_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates. Throws std::invalid_argument
  /// for a non-scalar loss or one not produced on this tape, NumericError on
  /// a non-finite gradient. Gradients add into existing buffers.
  void backward(const Tensor& loss);

  /// Creates the output node of an op. When no input requires a gradient
  /// the result is a constant and nothing is recorded.
  Tensor record(Matrix value, bool requires_grad, std::function<void(detail::Node&)> backward);

 private:
  std::vector<std::shared_ptr<detail::Node>> nodes_;
};

// Operations. Each validates shapes (std::invalid_argument) and raises
// NumericError if its output is not finite.

/// [r x k] * [k x c]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
/// x + b with b of shape [1 x c] broadcast over rows.
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& b);
Tensor relu(Tape& tape, const Tensor& x);
/// Identity activation. Exists so forward passes can switch the
/// nonlinearity off without changing graph structure.
Tensor identity(Tape& tape, const Tensor& x);
/// Inverted dropout: survivors are scaled by 1 / (1 - rate) in training, and
/// the op is the identity when `training` is false or rate is 0.
Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training, Rng& rng);
/// Row i multiplied by scale[i].
Tensor row_scale(Tape& tape, const Tensor& x, std::span<const double> scale);

/// Gather/scatter mean over index lists (see weighted_segment_sum):
/// out[t] = sum_{s in lists[t]} weights[s] * x[s] / divisors[t].
/// `lists` must outlive the tape's backward pass.
Tensor segment_mean_weighted(Tape& tape, const Tensor& x, const AdjacencyList& lists,
                             std::span<const double> weights, std::span<const double> divisors);

/// Mean over `rows` of -log softmax(logits[r])[labels[r]], stabilized by
/// subtracting the row max. `labels` is indexed by row. Throws
/// std::invalid_argument on an empty row set or out-of-range label.
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels,
                             std::span<const Id> rows);

/// Sum of all entries, as a [1 x 1] tensor.
Tensor sum(Tape& tape, const Tensor& x);
/// Sum of the entrywise product with a fixed coefficient matrix.
Tensor weighted_sum(Tape& tape, const Tensor& x, const Matrix& coefficients);

// Flat binary layout: rows and cols as little-endian uint64, then
// rows*cols little-endian IEEE-754 doubles in row-major order.
void write_matrix_binary(std::ostream& out, const Matrix& m);
Matrix read_matrix_binary(std::istream& in);

}  // namespace hnhn
