#pragma once

#include <span>

#include "hnhn/hypergraph.hpp"
#include "hnhn/matrix.hpp"

namespace hnhn {

/// Gather/scatter kernel behind every hypergraph convolution:
///
///   out[t] = (sum over s in lists[t] of weights[s] * x[s]) / divisors[t]
///
/// `lists` has one row per target; sources are summed in ascending id order
/// so the result is bit-reproducible. Throws std::invalid_argument when a
/// source id is out of range, a divisor is not positive, or a size disagrees.
Matrix weighted_segment_sum(const Matrix& x, const AdjacencyList& lists,
                            std::span<const double> weights, std::span<const double> divisors);

/// Adjoint of weighted_segment_sum: grad_x[s] += weights[s] / divisors[t] * grad_out[t]
/// for every s in lists[t]. Assumes the arguments already passed validation.
void weighted_segment_sum_backward(const Matrix& grad_out, const AdjacencyList& lists,
                                   std::span<const double> weights,
                                   std::span<const double> divisors, Matrix& grad_x);

}  // namespace hnhn
