#include "hnhn/autodiff.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "hnhn/aggregate.hpp"

namespace hnhn {

using detail::Node;

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) throw NumericError(std::string(op) + ": non-finite value");
}

void accumulate(const std::shared_ptr<Node>& parent, const Matrix& contribution, const char* op) {
  if (!parent->requires_grad) return;
  if (!contribution.all_finite()) throw NumericError(std::string(op) + ": non-finite gradient");
  parent->grad_buffer() += contribution;
}

}  // namespace

Tensor Tensor::parameter(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Tensor Tensor::constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw std::invalid_argument("item() on a " + shape_str(*this) + " tensor");
  }
  return value()(0, 0);
}

Tensor Tape::record(Matrix value, bool requires_grad,
                    std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  if (requires_grad) {
    node->backward = std::move(backward);
    nodes_.push_back(node);
  }
  return Tensor(std::move(node));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1) {
    throw std::invalid_argument("backward: loss must be a 1x1 tensor");
  }
  const auto it = std::find(nodes_.rbegin(), nodes_.rend(), loss.node());
  if (it == nodes_.rend()) {
    throw std::invalid_argument("backward: loss was not recorded on this tape");
  }
  loss.node()->grad_buffer()(0, 0) = 1.0;
  for (auto cur = it; cur != nodes_.rend(); ++cur) {
    Node& node = **cur;
    if (node.grad.empty() || !node.backward) continue;
    node.backward(node);
  }
}

namespace {

bool any_requires_grad(std::initializer_list<const Tensor*> ts) {
  return std::any_of(ts.begin(), ts.end(), [](const Tensor* t) { return t->requires_grad(); });
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a) + " and " +
                                shape_str(b));
  }
  Matrix out = matmul(a.value(), b.value());
  require_finite(out, "matmul");
  auto pa = a.node();
  auto pb = b.node();
  return tape.record(std::move(out), any_requires_grad({&a, &b}), [pa, pb](Node& self) {
    if (pa->requires_grad) accumulate(pa, matmul_nt(self.grad, pb->value), "matmul");
    if (pb->requires_grad) accumulate(pb, matmul_tn(pa->value, self.grad), "matmul");
  });
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& b) {
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw std::invalid_argument("add_bias: bias " + shape_str(b) + " for input " + shape_str(x));
  }
  Matrix out = x.value();
  const auto bias = b.value().row(0);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
  require_finite(out, "add_bias");
  auto px = x.node();
  auto pb = b.node();
  return tape.record(std::move(out), any_requires_grad({&x, &b}), [px, pb](Node& self) {
    accumulate(px, self.grad, "add_bias");
    if (pb->requires_grad) {
      Matrix column_sums(1, self.grad.cols());
      for (std::size_t r = 0; r < self.grad.rows(); ++r) {
        const auto g = self.grad.row(r);
        for (std::size_t c = 0; c < g.size(); ++c) column_sums(0, c) += g[c];
      }
      accumulate(pb, column_sums, "add_bias");
    }
  });
}

Tensor relu(Tape& tape, const Tensor& x) {
  Matrix out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  auto px = x.node();
  return tape.record(std::move(out), x.requires_grad(), [px](Node& self) {
    Matrix g = self.grad;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (!(self.value.data()[k] > 0.0)) g.data()[k] = 0.0;
    accumulate(px, g, "relu");
  });
}

Tensor identity(Tape& tape, const Tensor& x) {
  auto px = x.node();
  return tape.record(x.value(), x.requires_grad(),
                     [px](Node& self) { accumulate(px, self.grad, "identity"); });
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (double& v : mask.data()) v = rng.uniform() < rate ? 0.0 : keep_scale;
  Matrix out = x.value();
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= mask.data()[k];
  auto px = x.node();
  return tape.record(std::move(out), x.requires_grad(),
                     [px, mask = std::move(mask)](Node& self) {
                       Matrix g = self.grad;
                       for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] *= mask.data()[k];
                       accumulate(px, g, "dropout");
                     });
}

Tensor row_scale(Tape& tape, const Tensor& x, std::span<const double> scale) {
  if (scale.size() != x.rows()) {
    throw std::invalid_argument("row_scale: " + std::to_string(scale.size()) +
                                " scales for " + shape_str(x));
  }
  Matrix out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (double& v : out.row(r)) v *= scale[r];
  require_finite(out, "row_scale");
  auto px = x.node();
  std::vector<double> s(scale.begin(), scale.end());
  return tape.record(std::move(out), x.requires_grad(), [px, s = std::move(s)](Node& self) {
    Matrix g = self.grad;
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (double& v : g.row(r)) v *= s[r];
    accumulate(px, g, "row_scale");
  });
}

Tensor segment_mean_weighted(Tape& tape, const Tensor& x, const AdjacencyList& lists,
                             std::span<const double> weights, std::span<const double> divisors) {
  for (double w : weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("segment_mean_weighted: non-finite weight");
  }
  Matrix out = weighted_segment_sum(x.value(), lists, weights, divisors);
  require_finite(out, "segment_mean_weighted");
  auto px = x.node();
  std::vector<double> w(weights.begin(), weights.end());
  std::vector<double> d(divisors.begin(), divisors.end());
  const AdjacencyList* index = &lists;
  return tape.record(std::move(out), x.requires_grad(),
                     [px, index, w = std::move(w), d = std::move(d)](Node& self) {
                       Matrix g(px->value.rows(), px->value.cols());
                       weighted_segment_sum_backward(self.grad, *index, w, d, g);
                       accumulate(px, g, "segment_mean_weighted");
                     });
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels,
                             std::span<const Id> rows) {
  if (rows.empty()) throw std::invalid_argument("softmax_cross_entropy: empty row mask");
  if (labels.size() != logits.rows()) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                " labels for " + shape_str(logits));
  }
  const std::size_t classes = logits.cols();
  const Matrix& z = logits.value();
  // Softmax probabilities of the masked rows, kept for the backward pass.
  Matrix probs(rows.size(), classes);
  double total = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Id r = rows[k];
    if (r >= z.rows()) throw std::invalid_argument("softmax_cross_entropy: row out of range");
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(y) +
                                  " of row " + std::to_string(r) + " out of range");
    }
    const auto zr = z.row(r);
    const double zmax = *std::max_element(zr.begin(), zr.end());
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      probs(k, c) = std::exp(zr[c] - zmax);
      denom += probs(k, c);
    }
    for (std::size_t c = 0; c < classes; ++c) probs(k, c) /= denom;
    total += std::log(denom) - (zr[y] - zmax);
  }
  Matrix out(1, 1, total / static_cast<double>(rows.size()));
  require_finite(out, "softmax_cross_entropy");

  auto pz = logits.node();
  std::vector<Id> row_ids(rows.begin(), rows.end());
  std::vector<int> targets;
  targets.reserve(rows.size());
  for (Id r : rows) targets.push_back(labels[r]);
  return tape.record(
      std::move(out), logits.requires_grad(),
      [pz, probs = std::move(probs), row_ids = std::move(row_ids),
       targets = std::move(targets)](Node& self) {
        const double scale = self.grad(0, 0) / static_cast<double>(row_ids.size());
        Matrix g(pz->value.rows(), pz->value.cols());
        for (std::size_t k = 0; k < row_ids.size(); ++k) {
          auto gr = g.row(row_ids[k]);
          for (std::size_t c = 0; c < gr.size(); ++c) gr[c] += scale * probs(k, c);
          gr[static_cast<std::size_t>(targets[k])] -= scale;
        }
        accumulate(pz, g, "softmax_cross_entropy");
      });
}

Tensor sum(Tape& tape, const Tensor& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  auto px = x.node();
  return tape.record(Matrix(1, 1, s), x.requires_grad(), [px](Node& self) {
    accumulate(px, Matrix(px->value.rows(), px->value.cols(), self.grad(0, 0)), "sum");
  });
}

Tensor weighted_sum(Tape& tape, const Tensor& x, const Matrix& coefficients) {
  if (!coefficients.same_shape(x.value())) {
    throw std::invalid_argument("weighted_sum: coefficient shape mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k)
    s += coefficients.data()[k] * x.value().data()[k];
  auto px = x.node();
  return tape.record(Matrix(1, 1, s), x.requires_grad(), [px, coefficients](Node& self) {
    Matrix g = coefficients;
    for (double& v : g.data()) v *= self.grad(0, 0);
    accumulate(px, g, "weighted_sum");
  });
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw std::runtime_error("matrix binary: truncated input");
  }
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

}  // namespace

void write_matrix_binary(std::ostream& out, const Matrix& m) {
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double v : m.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

Matrix read_matrix_binary(std::istream& in) {
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) {
    throw std::runtime_error("matrix binary: implausible shape");
  }
  std::vector<double> data(rows * cols);
  for (double& v : data) v = std::bit_cast<double>(get_u64(in));
  return Matrix(rows, cols, std::move(data));
}

}  // namespace hnhn
