#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <sstream>

#include "hnhn/aggregate.hpp"
#include "hnhn/autodiff.hpp"
#include "hnhn/synthetic.hpp"
#include "oracles.hpp"

namespace hnhn {
namespace {

// Dense reference for one node-to-edge aggregation:
// diag(1/divisor) * Aᵀ * diag(weights) * X.
Matrix dense_to_edges(const Matrix& a, const Matrix& x, const std::vector<double>& weights,
                      const std::vector<double>& divisors) {
  std::vector<double> inv(divisors.size());
  for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = 1.0 / divisors[k];
  return oracle::naive_matmul(
      oracle::naive_matmul(oracle::diag(inv), transpose(a)),
      oracle::naive_matmul(oracle::diag(weights), x));
}

TEST(SegmentSum, MatchesDenseNormalizedProduct) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(15);
    const Hypergraph h = random_hypergraph(n, 1 + rng.below(15), 6, rng);
    const Matrix a = oracle::incidence(h.edges(), n);
    const double alpha = rng.uniform(-1.5, 1.5), beta = rng.uniform(-1.5, 1.5);
    const auto t = normalization_tables(h, alpha, beta);
    const Matrix x = oracle::random_matrix(n, 3, rng);

    const Matrix got = weighted_segment_sum(x, h.edge_to_nodes(), t.node_scale_beta,
                                            t.edge_divisor_beta);
    const Matrix want = dense_to_edges(a, x, t.node_scale_beta, t.edge_divisor_beta);
    EXPECT_LT(max_abs_diff(got, want), 1e-10);

    // Edges back to nodes uses the transpose incidence.
    const Matrix xe = oracle::random_matrix(h.num_edges(), 2, rng);
    const Matrix back = weighted_segment_sum(xe, h.node_to_edges(), t.edge_scale_alpha,
                                             t.node_divisor_alpha);
    const Matrix back_want =
        dense_to_edges(transpose(a), xe, t.edge_scale_alpha, t.node_divisor_alpha);
    EXPECT_LT(max_abs_diff(back, back_want), 1e-10);
  }
}

TEST(SegmentSum, BackwardIsTheDenseAdjoint) {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const Hypergraph h = random_hypergraph(n, 1 + rng.below(12), 5, rng);
    const Matrix a = oracle::incidence(h.edges(), n);
    const auto t = normalization_tables(h, rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Matrix g = oracle::random_matrix(h.num_edges(), 3, rng);

    Matrix grad_x(n, 3);
    weighted_segment_sum_backward(g, h.edge_to_nodes(), t.node_scale_beta, t.edge_divisor_beta,
                                  grad_x);
    // Adjoint of D^-1 Aᵀ W is W A D^-1.
    std::vector<double> inv(t.edge_divisor_beta.size());
    for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = 1.0 / t.edge_divisor_beta[k];
    const Matrix want = oracle::naive_matmul(
        oracle::naive_matmul(oracle::diag(t.node_scale_beta), a),
        oracle::naive_matmul(oracle::diag(inv), g));
    EXPECT_LT(max_abs_diff(grad_x, want), 1e-10);
  }
}

TEST(SegmentSum, Validation) {
  const Hypergraph h = build_hypergraph({{0, 1}}, 2);
  const Matrix x(2, 1);
  const std::vector<double> w{1.0, 1.0}, d{2.0}, zero{0.0};
  EXPECT_NO_THROW(weighted_segment_sum(x, h.edge_to_nodes(), w, d));
  EXPECT_THROW(weighted_segment_sum(x, h.edge_to_nodes(), w, zero), std::invalid_argument);
  EXPECT_THROW(weighted_segment_sum(Matrix(1, 1), h.edge_to_nodes(), w, d),
               std::invalid_argument);
  EXPECT_THROW(weighted_segment_sum(x, h.edge_to_nodes(), std::vector<double>{1.0}, d),
               std::invalid_argument);
}

// Builds a small graph through every op and checks each parameter's
// gradient against central differences.
struct Fixture {
  Hypergraph h;
  NormalizationTables t;
  Matrix x, w1, b1, w2, coeffs;
  std::vector<int> labels;
  std::vector<Id> rows;
};

Fixture make_fixture(std::uint64_t seed) {
  Rng rng(seed);
  Fixture f;
  f.h = random_hypergraph(8, 6, 4, rng);
  f.t = normalization_tables(f.h, rng.uniform(-1, 1), rng.uniform(-1, 1));
  f.x = oracle::random_matrix(8, 3, rng);
  f.w1 = oracle::random_matrix(3, 4, rng, 0.5);
  f.b1 = oracle::random_matrix(1, 4, rng, 0.5);
  f.w2 = oracle::random_matrix(4, 3, rng, 0.5);
  f.coeffs = oracle::random_matrix(8, 3, rng, 0.1);
  for (Id i = 0; i < 8; ++i) {
    f.labels.push_back(static_cast<int>(rng.below(3)));
    if (i % 3 != 1) f.rows.push_back(i);
  }
  return f;
}

double run(Tape& tape, const Fixture& f, Tensor x, Tensor w1, Tensor b1, Tensor w2,
           bool use_ce) {
  Tensor hdn = add_bias(tape, matmul(tape, x, w1), b1);
  Tensor e = segment_mean_weighted(tape, hdn, f.h.edge_to_nodes(), f.t.node_scale_beta,
                                   f.t.edge_divisor_beta);
  e = relu(tape, e);
  Tensor v = segment_mean_weighted(tape, e, f.h.node_to_edges(), f.t.edge_scale_alpha,
                                   f.t.node_divisor_alpha);
  v = identity(tape, row_scale(tape, v, f.t.node_scale_beta));
  Tensor out = matmul(tape, v, w2);
  Tensor loss = use_ce ? softmax_cross_entropy(tape, out, f.labels, f.rows)
                       : weighted_sum(tape, out, f.coeffs);
  if (use_ce) loss = sum(tape, loss);
  tape.backward(loss);
  return loss.item();
}

class GradCheck : public ::testing::TestWithParam<std::tuple<std::uint64_t, bool>> {};

TEST_P(GradCheck, AnalyticMatchesFiniteDifferences) {
  const auto [seed, use_ce] = GetParam();
  Fixture f = make_fixture(seed);
  Tensor x = Tensor::parameter(f.x), w1 = Tensor::parameter(f.w1),
         b1 = Tensor::parameter(f.b1), w2 = Tensor::parameter(f.w2);
  Tape tape;
  run(tape, f, x, w1, b1, w2, use_ce);

  auto eval = [&](const Matrix& xv, const Matrix& w1v, const Matrix& b1v, const Matrix& w2v) {
    Tape t;
    return run(t, f, Tensor::constant(xv), Tensor::parameter(w1v), Tensor::constant(b1v),
               Tensor::constant(w2v), use_ce);
  };
  Matrix px = f.x, pw1 = f.w1, pb1 = f.b1, pw2 = f.w2;
  auto f_all = [&] { return eval(px, pw1, pb1, pw2); };

  EXPECT_LT(oracle::max_relative_error(x.grad(), oracle::numeric_gradient(px, f_all)), 1e-4);
  EXPECT_LT(oracle::max_relative_error(w1.grad(), oracle::numeric_gradient(pw1, f_all)), 1e-4);
  EXPECT_LT(oracle::max_relative_error(b1.grad(), oracle::numeric_gradient(pb1, f_all)), 1e-4);
  EXPECT_LT(oracle::max_relative_error(w2.grad(), oracle::numeric_gradient(pw2, f_all)), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradCheck,
                         ::testing::Combine(::testing::Range<std::uint64_t>(1, 21),
                                            ::testing::Bool()));

TEST(CrossEntropy, TwoEqualLogitsGiveLnTwo) {
  Tape tape;
  Tensor logits = Tensor::parameter(Matrix(1, 2));
  const std::vector<int> labels{0};
  const std::vector<Id> rows{0};
  Tensor loss = softmax_cross_entropy(tape, logits, labels, rows);
  EXPECT_NEAR(loss.item(), std::log(2.0), 1e-15);
  tape.backward(loss);
  EXPECT_NEAR(logits.grad()(0, 0), -0.5, 1e-15);
  EXPECT_NEAR(logits.grad()(0, 1), 0.5, 1e-15);
}

TEST(CrossEntropy, StableForLargeLogits) {
  Matrix m(1, 2);
  m(0, 0) = 1000.0;
  Tape tape;
  Tensor logits = Tensor::parameter(m);
  const std::vector<int> right{0}, wrong{1};
  const std::vector<Id> rows{0};
  Tensor loss = softmax_cross_entropy(tape, logits, right, rows);
  EXPECT_TRUE(std::isfinite(loss.item()));
  EXPECT_NEAR(loss.item(), 0.0, 1e-12);
  tape.backward(loss);
  EXPECT_TRUE(logits.grad().all_finite());

  Tape t2;
  EXPECT_NEAR(softmax_cross_entropy(t2, Tensor::constant(m), wrong, rows).item(), 1000.0, 1e-9);
}

TEST(CrossEntropy, Validation) {
  Tape tape;
  Tensor logits = Tensor::parameter(Matrix(2, 2));
  const std::vector<int> labels{0, 2};
  const std::vector<Id> none{}, bad_row{1};
  EXPECT_THROW(softmax_cross_entropy(tape, logits, labels, none), std::invalid_argument);
  EXPECT_THROW(softmax_cross_entropy(tape, logits, labels, bad_row), std::invalid_argument);
}

TEST(Dropout, IdentityWhenEvaluatingOrRateZero) {
  Rng rng(1);
  Tape tape;
  const Tensor x = Tensor::parameter(Matrix::identity(4));
  EXPECT_EQ(dropout(tape, x, 0.5, false, rng).value(), x.value());
  EXPECT_EQ(dropout(tape, x, 0.0, true, rng).value(), x.value());
  EXPECT_THROW(dropout(tape, x, 1.0, true, rng), std::invalid_argument);
  EXPECT_THROW(dropout(tape, x, -0.1, true, rng), std::invalid_argument);
}

TEST(Dropout, InvertedScalingPreservesExpectation) {
  Rng rng(2);
  Matrix ones(200, 50);
  ones.fill(1.0);
  Tape tape;
  const Tensor x = Tensor::parameter(ones);
  const Tensor y = dropout(tape, x, 0.3, true, rng);
  double total = 0.0;
  std::size_t zeros = 0;
  for (double v : y.value().data()) {
    total += v;
    if (v == 0.0) ++zeros;
    else EXPECT_NEAR(v, 1.0 / 0.7, 1e-15);
  }
  EXPECT_NEAR(total / 10000.0, 1.0, 0.03);
  EXPECT_NEAR(static_cast<double>(zeros) / 10000.0, 0.3, 0.02);
  // Gradient flows only through the survivors, with the same scale.
  tape.backward(sum(tape, y));
  for (std::size_t k = 0; k < ones.size(); ++k)
    EXPECT_EQ(x.grad().data()[k], y.value().data()[k]);
}

TEST(Tape, BackwardInReverseOrderAndAccumulates) {
  Tape tape;
  Tensor w = Tensor::parameter(Matrix::identity(2));
  Tensor x = Tensor::constant(Matrix::identity(2));
  Tensor y = matmul(tape, x, w);
  Tensor loss = sum(tape, add_bias(tape, matmul(tape, y, w), Tensor::constant(Matrix(1, 2))));
  EXPECT_EQ(tape.size(), 4u);
  tape.backward(loss);
  // d/dW sum(x W W) with x = W = I is 2 * ones.
  for (double g : w.grad().data()) EXPECT_EQ(g, 2.0);
  Tape again;
  again.backward(sum(again, matmul(again, x, w)));
  for (double g : w.grad().data()) EXPECT_EQ(g, 3.0);
  w.zero_grad();
  for (double g : w.grad().data()) EXPECT_EQ(g, 0.0);
}

TEST(Tape, RejectsForeignOrNonScalarLoss) {
  Tape a, b;
  Tensor w = Tensor::parameter(Matrix::identity(2));
  Tensor loss = sum(a, w);
  EXPECT_THROW(b.backward(loss), std::invalid_argument);
  EXPECT_THROW(a.backward(relu(a, w)), std::invalid_argument);
}

TEST(Tape, ConstantsAreNotRecorded) {
  Tape tape;
  Tensor c = Tensor::constant(Matrix::identity(2));
  Tensor y = relu(tape, matmul(tape, c, c));
  EXPECT_FALSE(y.requires_grad());
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Ops, ShapeErrorsAndNonFiniteValues) {
  Tape tape;
  Tensor a = Tensor::parameter(Matrix(2, 3));
  EXPECT_THROW(matmul(tape, a, a), std::invalid_argument);
  EXPECT_THROW(add_bias(tape, a, Tensor::constant(Matrix(1, 2))), std::invalid_argument);
  EXPECT_THROW(row_scale(tape, a, std::vector<double>{1.0}), std::invalid_argument);
  Matrix big(1, 1);
  big(0, 0) = 1e300;
  Tensor p = Tensor::parameter(big);
  EXPECT_THROW(matmul(tape, p, p), NumericError);
}

TEST(BinaryFormat, RoundTripsExactly) {
  Rng rng(3);
  Matrix m = oracle::random_matrix(5, 7, rng);
  m(0, 0) = -0.0;
  m(1, 1) = 1e-310;
  std::stringstream buf;
  write_matrix_binary(buf, m);
  EXPECT_EQ(buf.str().size(), 16u + 35u * 8u);
  const Matrix back = read_matrix_binary(buf);
  ASSERT_EQ(back.rows(), 5u);
  for (std::size_t k = 0; k < m.size(); ++k)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back.data()[k]),
              std::bit_cast<std::uint64_t>(m.data()[k]));

  std::stringstream truncated(buf.str().substr(0, 20));
  EXPECT_THROW(read_matrix_binary(truncated), std::runtime_error);
}

}  // namespace
}  // namespace hnhn
