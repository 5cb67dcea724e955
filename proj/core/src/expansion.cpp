#include "hnhn/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "hnhn/aggregate.hpp"

namespace hnhn {

namespace {

void check_cap(std::size_t dim, std::size_t cap, const char* what) {
  if (dim > cap) {
    throw std::length_error(std::string(what) + ": dimension " + std::to_string(dim) +
                            " exceeds dense cap " + std::to_string(cap));
  }
}

void add_bias_rows(DenseMatrix& x, std::span<const double> bias) {
  if (bias.size() != x.cols()) {
    throw std::invalid_argument("bias length " + std::to_string(bias.size()) +
                                " does not match " + std::to_string(x.cols()) + " columns");
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
}

void relu_inplace(DenseMatrix& x) {
  for (double& v : x.data()) v = std::max(v, 0.0);
}

DenseMatrix block(const DenseMatrix& m, std::size_t row0, std::size_t rows) {
  DenseMatrix out(rows, m.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = m.row(row0 + r);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

DenseMatrix incidence_matrix(const Hypergraph& h, std::size_t cap) {
  check_cap(h.num_nodes(), cap, "incidence_matrix");
  check_cap(h.num_edges(), cap, "incidence_matrix");
  DenseMatrix a(h.num_nodes(), h.num_edges());
  for (std::size_t j = 0; j < h.num_edges(); ++j)
    for (Id i : h.edge_to_nodes()[j]) a(i, j) = 1.0;
  return a;
}

DenseMatrix clique_adjacency(const Hypergraph& h, std::size_t cap) {
  check_cap(h.num_nodes(), cap, "clique_adjacency");
  DenseMatrix c(h.num_nodes(), h.num_nodes());
  for (std::size_t j = 0; j < h.num_edges(); ++j) {
    const auto members = h.edge_to_nodes()[j];
    for (Id a : members)
      for (Id b : members) c(a, b) += 1.0;
  }
  return c;
}

DenseMatrix star_adjacency(const Hypergraph& h, std::size_t cap) {
  const std::size_t n = h.num_nodes();
  const std::size_t total = n + h.num_edges();
  check_cap(total, cap, "star_adjacency");
  DenseMatrix b(total, total);
  for (std::size_t j = 0; j < h.num_edges(); ++j) {
    for (Id i : h.edge_to_nodes()[j]) {
      b(i, n + j) = 1.0;
      b(n + j, i) = 1.0;
    }
  }
  return b;
}

DenseMatrix graph_convolution_step(const DenseMatrix& adj, const DenseMatrix& x,
                                   const DenseMatrix& w, std::span<const double> bias,
                                   bool with_nonlinearity) {
  if (adj.rows() != adj.cols()) throw std::invalid_argument("adjacency must be square");
  DenseMatrix out = matmul(matmul(adj, x), w);
  add_bias_rows(out, bias);
  if (with_nonlinearity) relu_inplace(out);
  return out;
}

CheckResult check_lemma1(const Hypergraph& h) {
  const DenseMatrix a = incidence_matrix(h);
  const DenseMatrix aat = matmul_nt(a, a);
  const DenseMatrix c = clique_adjacency(h);
  CheckResult result{true, 0.0};
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto lhs = std::llround(c.data()[k]);
    const auto rhs = std::llround(aat.data()[k]);
    if (lhs != rhs) result.passed = false;
    result.max_error = std::max(result.max_error, static_cast<double>(std::llabs(lhs - rhs)));
  }
  return result;
}

DenseMatrix linear_two_step(const Hypergraph& h, const DenseMatrix& x_v, const DenseMatrix& w_e,
                            const DenseMatrix& w_v, std::span<const double> b_e,
                            std::span<const double> b_v) {
  const auto unit = NormalizationTables::unit(h);
  DenseMatrix x_e = matmul(
      weighted_segment_sum(x_v, h.edge_to_nodes(), unit.node_scale_beta, unit.edge_divisor_beta),
      w_e);
  add_bias_rows(x_e, b_e);
  DenseMatrix out = matmul(
      weighted_segment_sum(x_e, h.node_to_edges(), unit.edge_scale_alpha, unit.node_divisor_alpha),
      w_v);
  add_bias_rows(out, b_v);
  return out;
}

CollapsedLinear collapse_linear(const Hypergraph& h, const DenseMatrix& w_e,
                                const DenseMatrix& w_v, std::span<const double> b_e,
                                std::span<const double> b_v) {
  CollapsedLinear c;
  c.weight = matmul(w_e, w_v);
  // Bias of the edge update as an m x d matrix (each row b_E).
  DenseMatrix edge_bias(h.num_edges(), b_e.size());
  add_bias_rows(edge_bias, b_e);
  c.bias = matmul(matmul(incidence_matrix(h), edge_bias), w_v);
  add_bias_rows(c.bias, b_v);
  return c;
}

DenseMatrix clique_linear_step(const Hypergraph& h, const DenseMatrix& x_v,
                               const CollapsedLinear& collapsed) {
  DenseMatrix out = matmul(matmul(clique_adjacency(h), x_v), collapsed.weight);
  out += collapsed.bias;
  return out;
}

CheckResult check_lemma2(const Hypergraph& h, const DenseMatrix& x_v, const DenseMatrix& w_e,
                         const DenseMatrix& w_v, std::span<const double> b_e,
                         std::span<const double> b_v) {
  const DenseMatrix two_step = linear_two_step(h, x_v, w_e, w_v, b_e, b_v);
  const DenseMatrix one_step = clique_linear_step(h, x_v, collapse_linear(h, w_e, w_v, b_e, b_v));
  const double err = max_abs_diff(two_step, one_step);
  return {err < kLemmaTolerance, err};
}

CheckResult check_weight_tied(const Hypergraph& h, const DenseMatrix& x_v, const DenseMatrix& w,
                              std::span<const double> b, std::size_t layers) {
  const std::size_t n = h.num_nodes();
  const std::size_t m = h.num_edges();
  const std::size_t d = x_v.cols();
  const auto unit = NormalizationTables::unit(h);
  const DenseMatrix star = star_adjacency(h);

  DenseMatrix hnhn_v = x_v;
  DenseMatrix state(n + m, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto src = x_v.row(r);
    std::copy(src.begin(), src.end(), state.row(r).begin());
  }

  CheckResult result{true, 0.0};
  auto record = [&](const DenseMatrix& expected, const DenseMatrix& actual) {
    const double err = max_abs_diff(expected, actual);
    result.max_error = std::max(result.max_error, err);
    if (!(err < kLemmaTolerance)) result.passed = false;
  };

  for (std::size_t layer = 0; layer < layers; ++layer) {
    DenseMatrix hnhn_e = matmul(
        weighted_segment_sum(hnhn_v, h.edge_to_nodes(), unit.node_scale_beta,
                             unit.edge_divisor_beta),
        w);
    add_bias_rows(hnhn_e, b);
    relu_inplace(hnhn_e);

    // Star step V -> E; keep the edge block, zero the node block.
    DenseMatrix next = graph_convolution_step(star, state, w, b, true);
    record(hnhn_e, block(next, n, m));
    state = DenseMatrix(n + m, d);
    for (std::size_t r = 0; r < m; ++r) {
      const auto src = next.row(n + r);
      std::copy(src.begin(), src.end(), state.row(n + r).begin());
    }

    hnhn_v = matmul(weighted_segment_sum(hnhn_e, h.node_to_edges(), unit.edge_scale_alpha,
                                         unit.node_divisor_alpha),
                    w);
    add_bias_rows(hnhn_v, b);
    relu_inplace(hnhn_v);

    // Star step E -> V; keep the node block.
    next = graph_convolution_step(star, state, w, b, true);
    record(hnhn_v, block(next, 0, n));
    state = DenseMatrix(n + m, d);
    for (std::size_t r = 0; r < n; ++r) {
      const auto src = next.row(r);
      std::copy(src.begin(), src.end(), state.row(r).begin());
    }
  }
  return result;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& input, double tolerance) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw std::invalid_argument("symmetric_eigenvalues: matrix not square");
  if (n > kMaxEigenDimension) {
    throw std::invalid_argument("symmetric_eigenvalues: dimension " + std::to_string(n) +
                                " exceeds " + std::to_string(kMaxEigenDimension));
  }
  double scale = 0.0;
  for (double v : input.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(input(i, j) - input(j, i)) > 1e-12 * std::max(1.0, scale)) {
        throw std::invalid_argument("symmetric_eigenvalues: matrix is not symmetric");
      }
    }
  }

  DenseMatrix a = input;
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  while (off_norm() >= tolerance) {
    if (++sweep > kMaxSweeps) throw std::runtime_error("Jacobi sweeps did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- Jᵀ A J with J the rotation in the (p, q) plane.
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

Hypergraph fano_plane() {
  return Hypergraph::from_edges(
      {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5}, {1, 4, 6}, {2, 3, 6}, {2, 4, 5}}, 7);
}

std::pair<Hypergraph, Hypergraph> fano_pair() {
  const Hypergraph f = fano_plane();
  std::vector<Id> swap_3_6{0, 1, 5, 3, 4, 2, 6};
  return {f, relabel_nodes(f, swap_3_6)};
}

Hypergraph relabel_nodes(const Hypergraph& h, std::span<const Id> perm) {
  if (perm.size() != h.num_nodes()) {
    throw std::invalid_argument("relabel_nodes: permutation length mismatch");
  }
  std::vector<std::vector<Id>> edges = h.edges();
  for (auto& e : edges)
    for (Id& i : e) i = perm[i];
  return Hypergraph::from_edges(edges, h.num_nodes());
}

std::vector<std::vector<Id>> canonical_edge_set(const Hypergraph& h) {
  std::vector<std::vector<Id>> edges = h.edges();  // members already sorted
  std::sort(edges.begin(), edges.end());
  return edges;
}

RelabelingCensus relabeling_census(const Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  if (n > 9) throw std::invalid_argument("relabeling_census: n > 9 is too many permutations");
  const auto original = canonical_edge_set(h);
  const DenseMatrix original_clique = clique_adjacency(h);

  RelabelingCensus census;
  std::set<std::vector<std::vector<Id>>> seen;
  std::vector<Id> perm(n);
  std::iota(perm.begin(), perm.end(), Id{0});
  do {
    ++census.permutations;
    const Hypergraph relabeled = relabel_nodes(h, perm);
    auto canon = canonical_edge_set(relabeled);
    if (canon == original) census.automorphisms.push_back(perm);
    if (seen.insert(std::move(canon)).second && clique_adjacency(relabeled) == original_clique) {
      ++census.same_clique_expansion;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  census.distinct_hypergraphs = seen.size();
  return census;
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  const auto old_precision = out.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hnhn
