#include "hnhn/aggregate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hnhn {

Matrix weighted_segment_sum(const Matrix& x, const AdjacencyList& lists,
                            std::span<const double> weights, std::span<const double> divisors) {
  if (weights.size() != x.rows()) {
    throw std::invalid_argument("segment sum: " + std::to_string(weights.size()) +
                                " weights for " + std::to_string(x.rows()) + " source rows");
  }
  if (divisors.size() != lists.size()) {
    throw std::invalid_argument("segment sum: " + std::to_string(divisors.size()) +
                                " divisors for " + std::to_string(lists.size()) + " targets");
  }
  const std::size_t cols = x.cols();
  Matrix out(lists.size(), cols);
  for (std::size_t t = 0; t < lists.size(); ++t) {
    const double div = divisors[t];
    if (!(div > 0.0) || !std::isfinite(div)) {
      throw std::invalid_argument("segment sum: divisor of target " + std::to_string(t) +
                                  " is not positive");
    }
    double* __restrict o = out.row(t).data();
    for (Id s : lists[t]) {
      if (s >= x.rows()) {
        throw std::invalid_argument("segment sum: source id " + std::to_string(s) +
                                    " out of range");
      }
      const double w = weights[s];
      const double* __restrict xs = x.row(s).data();
      for (std::size_t c = 0; c < cols; ++c) o[c] += w * xs[c];
    }
    const double inv = 1.0 / div;
    for (std::size_t c = 0; c < cols; ++c) o[c] *= inv;
  }
  return out;
}

void weighted_segment_sum_backward(const Matrix& grad_out, const AdjacencyList& lists,
                                   std::span<const double> weights,
                                   std::span<const double> divisors, Matrix& grad_x) {
  const std::size_t cols = grad_out.cols();
  for (std::size_t t = 0; t < lists.size(); ++t) {
    const double inv = 1.0 / divisors[t];
    const double* __restrict g = grad_out.row(t).data();
    for (Id s : lists[t]) {
      const double coeff = weights[s] * inv;
      double* __restrict gx = grad_x.row(s).data();
      for (std::size_t c = 0; c < cols; ++c) gx[c] += coeff * g[c];
    }
  }
}

}  // namespace hnhn
