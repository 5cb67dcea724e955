#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hnhn/expansion.hpp"
#include "hnhn/synthetic.hpp"
#include "hnhn/verify.hpp"
#include "oracles.hpp"

namespace hnhn {
namespace {

using Edges = std::vector<std::vector<Id>>;

bool contains_close(const std::vector<double>& values, double target, double tol) {
  return std::any_of(values.begin(), values.end(),
                     [&](double v) { return std::abs(v - target) <= tol; });
}

TEST(Expansion, IncidenceMatchesOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Hypergraph h = random_hypergraph(1 + rng.below(12), rng.below(12), 5, rng);
    EXPECT_EQ(incidence_matrix(h), oracle::incidence(h.edges(), h.num_nodes()));
  }
}

TEST(Expansion, FanoCliqueIsOnesWithThreeOnDiagonal) {
  const Matrix c = clique_adjacency(fano_plane());
  for (std::size_t a = 0; a < 7; ++a)
    for (std::size_t b = 0; b < 7; ++b) EXPECT_EQ(c(a, b), a == b ? 3.0 : 1.0);
}

TEST(Expansion, SingleEdgeStar) {
  const Matrix b = star_adjacency(build_hypergraph({{0, 1}}, 2));
  Matrix expected(3, 3);
  expected(0, 2) = expected(1, 2) = expected(2, 0) = expected(2, 1) = 1.0;
  EXPECT_EQ(b, expected);
}

TEST(Expansion, CliqueEqualsIncidenceProductOnRandomInstances) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Hypergraph h = random_hypergraph(1 + rng.below(15), rng.below(15), 6, rng);
    const Matrix a = oracle::incidence(h.edges(), h.num_nodes());
    EXPECT_EQ(clique_adjacency(h), oracle::naive_matmul(a, transpose(a)));
    EXPECT_TRUE(check_lemma1(h));
  }
}

TEST(Expansion, StarSquaredTopLeftBlockIsClique) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Hypergraph h = random_hypergraph(1 + rng.below(10), 1 + rng.below(10), 5, rng);
    const Matrix b = star_adjacency(h);
    const Matrix b2 = oracle::naive_matmul(b, b);
    const Matrix c = clique_adjacency(h);
    for (std::size_t i = 0; i < h.num_nodes(); ++i)
      for (std::size_t k = 0; k < h.num_nodes(); ++k) EXPECT_EQ(b2(i, k), c(i, k));
  }
}

TEST(Expansion, DenseCapThrows) {
  const Hypergraph h = fano_plane();
  EXPECT_THROW(incidence_matrix(h, 6), std::length_error);
  EXPECT_THROW(clique_adjacency(h, 6), std::length_error);
  EXPECT_THROW(star_adjacency(h, 13), std::length_error);
  EXPECT_NO_THROW(star_adjacency(h, 14));
}

TEST(Expansion, LinearTwoStepMatchesDenseProduct) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Hypergraph h = random_hypergraph(2 + rng.below(10), 1 + rng.below(10), 5, rng);
    const Matrix a = oracle::incidence(h.edges(), h.num_nodes());
    const Matrix x = oracle::random_matrix(h.num_nodes(), 3, rng);
    const Matrix we = oracle::random_matrix(3, 4, rng);
    const Matrix wv = oracle::random_matrix(4, 2, rng);
    const std::vector<double> be{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const std::vector<double> bv{rng.normal(), rng.normal()};

    Matrix xe = oracle::naive_matmul(oracle::naive_matmul(transpose(a), x), we);
    for (std::size_t r = 0; r < xe.rows(); ++r)
      for (std::size_t c = 0; c < xe.cols(); ++c) xe(r, c) += be[c];
    Matrix expected = oracle::naive_matmul(oracle::naive_matmul(a, xe), wv);
    for (std::size_t r = 0; r < expected.rows(); ++r)
      for (std::size_t c = 0; c < expected.cols(); ++c) expected(r, c) += bv[c];

    EXPECT_LT(max_abs_diff(linear_two_step(h, x, we, wv, be, bv), expected), 1e-10);
  }
}

TEST(Expansion, CollapsedLinearAgreesWithTwoSteps) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Hypergraph h = random_hypergraph(2 + rng.below(12), 1 + rng.below(12), 5, rng);
    const std::size_t d0 = 1 + rng.below(4), d1 = 1 + rng.below(4), d2 = 1 + rng.below(4);
    const Matrix x = oracle::random_matrix(h.num_nodes(), d0, rng);
    const Matrix we = oracle::random_matrix(d0, d1, rng);
    const Matrix wv = oracle::random_matrix(d1, d2, rng);
    std::vector<double> be(d1), bv(d2);
    for (double& v : be) v = rng.normal();
    for (double& v : bv) v = rng.normal();
    const CheckResult r = check_lemma2(h, x, we, wv, be, bv);
    EXPECT_TRUE(r) << "max error " << r.max_error;
    EXPECT_LT(r.max_error, kLemmaTolerance);
  }
}

TEST(Expansion, CollapsedBiasDependsOnDegree) {
  // Node 0 lies in two edges, node 2 in one: A b_E differs between them.
  const Hypergraph h = build_hypergraph({{0, 1}, {0, 2}}, 3);
  Matrix we(1, 1), wv(1, 1);
  we(0, 0) = 1.0;
  wv(0, 0) = 1.0;
  const std::vector<double> be{1.0}, bv{0.5};
  const CollapsedLinear c = collapse_linear(h, we, wv, be, bv);
  EXPECT_EQ(c.bias(0, 0), 2.5);
  EXPECT_EQ(c.bias(2, 0), 1.5);
}

TEST(Expansion, WeightTiedHnhnIsStarConvolution) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Hypergraph h = random_hypergraph(2 + rng.below(10), 1 + rng.below(10), 5, rng);
    const std::size_t d = 1 + rng.below(4);
    const Matrix x = oracle::random_matrix(h.num_nodes(), d, rng);
    const Matrix w = oracle::random_matrix(d, d, rng, 0.5);
    std::vector<double> b(d);
    for (double& v : b) v = rng.normal();
    const CheckResult r = check_weight_tied(h, x, w, b, 1 + rng.below(3));
    EXPECT_TRUE(r) << "max error " << r.max_error;
  }
}

TEST(Eigen, IdentityAndSwap) {
  const auto id = symmetric_eigenvalues(Matrix::identity(3));
  ASSERT_EQ(id.size(), 3u);
  for (double v : id) EXPECT_NEAR(v, 1.0, 1e-12);

  Matrix swap(2, 2);
  swap(0, 1) = swap(1, 0) = 1.0;
  const auto s = symmetric_eigenvalues(swap);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0], -1.0, 1e-12);
  EXPECT_NEAR(s[1], 1.0, 1e-12);
}

TEST(Eigen, FanoCliqueSpectrum) {
  const auto ev = symmetric_eigenvalues(clique_adjacency(fano_plane()));
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(ev[k], 2.0, 1e-9);
  EXPECT_NEAR(ev[6], 9.0, 1e-9);
}

TEST(Eigen, TraceAndRejections) {
  Rng rng(12);
  Matrix m = oracle::random_matrix(8, 8, rng);
  m = m + transpose(m);
  const auto ev = symmetric_eigenvalues(m);
  double trace = 0.0;
  for (std::size_t i = 0; i < 8; ++i) trace += m(i, i);
  EXPECT_NEAR(std::accumulate(ev.begin(), ev.end(), 0.0), trace, 1e-9);
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));

  Matrix asym(2, 2);
  asym(0, 1) = 1.0;
  EXPECT_THROW(symmetric_eigenvalues(asym), std::invalid_argument);
  EXPECT_THROW(symmetric_eigenvalues(Matrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(symmetric_eigenvalues(Matrix::identity(kMaxEigenDimension + 1)),
               std::invalid_argument);
}

TEST(Eigen, StarSpectrumIsSymmetricAndSquaresToClique) {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const Hypergraph h = random_hypergraph(2 + rng.below(8), 1 + rng.below(8), 4, rng);
    const auto star = symmetric_eigenvalues(star_adjacency(h));
    const auto clique = symmetric_eigenvalues(clique_adjacency(h));
    for (std::size_t k = 0; k < star.size(); ++k)
      EXPECT_NEAR(star[k], -star[star.size() - 1 - k], 1e-8);
    for (double mu : clique) {
      const double root = std::sqrt(std::max(mu, 0.0));
      EXPECT_TRUE(contains_close(star, root, 1e-6)) << "missing sqrt of " << mu;
      EXPECT_TRUE(contains_close(star, -root, 1e-6));
    }
    for (double lambda : star) {
      if (std::abs(lambda) < 1e-6) continue;
      EXPECT_TRUE(contains_close(clique, lambda * lambda, 1e-6));
    }
  }
}

TEST(Fano, PairSharesCliqueExpansionButDiffers) {
  const auto [f, g] = fano_pair();
  EXPECT_NE(canonical_edge_set(f), canonical_edge_set(g));
  EXPECT_EQ(clique_adjacency(f), clique_adjacency(g));
  EXPECT_NE(incidence_matrix(f), incidence_matrix(g));
}

TEST(Fano, RelabelingCensus) {
  const RelabelingCensus census = relabeling_census(fano_plane());
  EXPECT_EQ(census.permutations, 5040u);
  EXPECT_EQ(census.distinct_hypergraphs, 30u);
  EXPECT_EQ(census.same_clique_expansion, 30u);
  EXPECT_EQ(census.automorphisms.size(), 168u);
  EXPECT_EQ(census.automorphisms.size() * census.distinct_hypergraphs, census.permutations);
}

TEST(Fano, AutomorphismsPreserveEdgeSet) {
  const Hypergraph f = fano_plane();
  const auto census = relabeling_census(f);
  for (std::size_t k = 0; k < census.automorphisms.size(); k += 17)
    EXPECT_EQ(canonical_edge_set(relabel_nodes(f, census.automorphisms[k])),
              canonical_edge_set(f));
}

TEST(Fano, CensusRejectsLargeGraphs) {
  Rng rng(0);
  EXPECT_THROW(relabeling_census(random_hypergraph(10, 3, 3, rng)), std::invalid_argument);
}

TEST(Expansion, GraphConvolutionStep) {
  Matrix adj = Matrix::identity(2);
  Matrix x(2, 1);
  x(0, 0) = 1.0;
  x(1, 0) = -3.0;
  Matrix w(1, 1);
  w(0, 0) = 2.0;
  const std::vector<double> b{0.5};
  const Matrix lin = graph_convolution_step(adj, x, w, b, false);
  EXPECT_EQ(lin(0, 0), 2.5);
  EXPECT_EQ(lin(1, 0), -5.5);
  const Matrix act = graph_convolution_step(adj, x, w, b, true);
  EXPECT_EQ(act(1, 0), 0.0);
}

TEST(Expansion, CsvOutput) {
  std::ostringstream out;
  write_matrix_csv(out, clique_adjacency(build_hypergraph({{0, 1}}, 2)));
  EXPECT_EQ(out.str(), "1,1\n1,1\n");
}

TEST(Verify, SuitesPassOnSeededInstances) {
  for (const auto& c : verify_lemmas(3, 20)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  for (const auto& c : verify_spectral(3, 10)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  const auto fano = verify_fano(0);
  ASSERT_EQ(fano.size(), 2u);
  EXPECT_TRUE(fano[0].passed);
  EXPECT_NE(fano[0].detail.find("clique outputs identical, HNHN outputs differ"), std::string::npos);
  EXPECT_TRUE(fano[1].passed);
}

TEST(Eigen, MoreEdgesThanNodesAddsZeros) {
  // One node in two edges: C = [2], B = [[0,1,1],[1,0,0],[1,0,0]] with
  // eigenvalues -sqrt(2), 0, sqrt(2). The zero has no counterpart in C.
  const Hypergraph h = build_hypergraph({{0}, {0}}, 1);
  const auto mu = symmetric_eigenvalues(clique_adjacency(h));
  const auto lambda = symmetric_eigenvalues(star_adjacency(h));
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_NEAR(mu[0], 2.0, 1e-12);
  ASSERT_EQ(lambda.size(), 3u);
  EXPECT_NEAR(lambda[0], -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(lambda[1], 0.0, 1e-12);
  EXPECT_NEAR(lambda[2], std::sqrt(2.0), 1e-12);
}

}  // namespace
}  // namespace hnhn
