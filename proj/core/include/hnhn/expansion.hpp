#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "hnhn/hypergraph.hpp"
#include "hnhn/matrix.hpp"

namespace hnhn {

using DenseMatrix = Matrix;

inline constexpr std::size_t kDefaultDenseCap = 10'000;

/// Dense n x m 0/1 incidence matrix. Only for small instances and checks;
/// the training path never builds it. Throws std::length_error above `cap`
/// on either dimension.
DenseMatrix incidence_matrix(const Hypergraph& h, std::size_t cap = kDefaultDenseCap);

/// Adjacency of the clique expansion with one self-loop per membership:
/// entry (a, b) counts the hyperedges containing both a and b. Built from
/// the adjacency lists, independently of incidence_matrix().
DenseMatrix clique_adjacency(const Hypergraph& h, std::size_t cap = kDefaultDenseCap);

/// Adjacency of the star (bipartite) expansion, nodes first then edges:
/// [[0, A], [Aᵀ, 0]].
DenseMatrix star_adjacency(const Hypergraph& h, std::size_t cap = kDefaultDenseCap);

/// One graph convolution: relu(adj * x * w + b) or the affine map alone when
/// `with_nonlinearity` is false. `bias` is broadcast across rows.
DenseMatrix graph_convolution_step(const DenseMatrix& adj, const DenseMatrix& x,
                                   const DenseMatrix& w, std::span<const double> bias,
                                   bool with_nonlinearity);

struct CheckResult {
  bool passed = false;
  double max_error = 0.0;
  explicit operator bool() const { return passed; }
};

/// Clique adjacency equals A Aᵀ entrywise, compared as integers.
CheckResult check_lemma1(const Hypergraph& h);

/// The activation-free two-step update computed with the gather/scatter
/// kernel (no normalization): X_E = Aᵀ X W_E + b_E, then A X_E W_V + b_V.
DenseMatrix linear_two_step(const Hypergraph& h, const DenseMatrix& x_v, const DenseMatrix& w_e,
                            const DenseMatrix& w_v, std::span<const double> b_e,
                            std::span<const double> b_v);

/// Collapsed single-step parameters: W_c = W_E W_V and the per-row bias
/// A b_E W_V + b_V (an n x d matrix, since A b_E depends on node degree).
struct CollapsedLinear {
  DenseMatrix weight;
  DenseMatrix bias;
};
CollapsedLinear collapse_linear(const Hypergraph& h, const DenseMatrix& w_e,
                                const DenseMatrix& w_v, std::span<const double> b_e,
                                std::span<const double> b_v);

/// C X W_c + b_c on the dense clique adjacency.
DenseMatrix clique_linear_step(const Hypergraph& h, const DenseMatrix& x_v,
                               const CollapsedLinear& collapsed);

inline constexpr double kLemmaTolerance = 1e-9;

/// linear_two_step agrees with clique_linear_step(collapse_linear(...)).
CheckResult check_lemma2(const Hypergraph& h, const DenseMatrix& x_v, const DenseMatrix& w_e,
                         const DenseMatrix& w_v, std::span<const double> b_e,
                         std::span<const double> b_v);

/// Weight-tied HNHN (W_E = W_V = w, b_E = b_V = b, ReLU, unit scaling) for
/// `layers` layers against graph_convolution_step iterated on the star
/// adjacency. The star state is the zero-padded concatenation [X_V; 0] or
/// [0; X_E]; after each star step only the block that received messages is
/// compared and kept, because relu(b) leaks into the dormant block.
CheckResult check_weight_tied(const Hypergraph& h, const DenseMatrix& x_v, const DenseMatrix& w,
                              std::span<const double> b, std::size_t layers);

inline constexpr std::size_t kMaxEigenDimension = 200;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Iterates until the off-diagonal Frobenius norm drops below `tolerance`.
/// Throws std::invalid_argument for asymmetric or oversized input and
/// std::runtime_error if the sweeps fail to converge.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& m, double tolerance = 1e-10);

/// The Fano plane on nodes 0..6.
Hypergraph fano_plane();

/// The Fano plane and the copy with nodes 3 and 6 (1-based) swapped.
std::pair<Hypergraph, Hypergraph> fano_pair();

/// Relabels nodes: node i becomes perm[i]. Edge order is preserved.
Hypergraph relabel_nodes(const Hypergraph& h, std::span<const Id> perm);

/// Edge set as a sorted list of sorted edges, so that hypergraphs equal as
/// incidence structures (up to edge order) compare equal.
std::vector<std::vector<Id>> canonical_edge_set(const Hypergraph& h);

struct RelabelingCensus {
  std::size_t permutations = 0;
  std::size_t distinct_hypergraphs = 0;
  /// Distinct relabelings whose clique adjacency equals the original's.
  std::size_t same_clique_expansion = 0;
  /// Permutations that map the edge set to itself.
  std::vector<std::vector<Id>> automorphisms;
};

/// Exhaustive pass over all n! node relabelings. Throws for n > 9.
RelabelingCensus relabeling_census(const Hypergraph& h);

void write_matrix_csv(std::ostream& out, const DenseMatrix& m);

}  // namespace hnhn
