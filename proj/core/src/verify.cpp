#include "hnhn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hnhn/expansion.hpp"
#include "hnhn/model.hpp"
#include "hnhn/rng.hpp"
#include "hnhn/synthetic.hpp"

namespace hnhn {

namespace {

Matrix normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

std::vector<double> normal_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

}  // namespace

std::vector<SuiteCheck> verify_lemmas(std::uint64_t seed, std::size_t instances) {
  SuiteCheck lemma1{"lemma1", true, instances, 0.0, {}};
  SuiteCheck lemma2{"lemma2", true, instances, 0.0, {}};
  SuiteCheck tied{"weight_tied", true, instances, 0.0, {}};
  Rng rng(seed);
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.below(20);
    const std::size_t m = 1 + rng.below(20);
    const std::size_t d = 1 + rng.below(8);
    const Hypergraph h = random_hypergraph(n, m, 6, rng);

    const CheckResult r1 = check_lemma1(h);
    lemma1.passed = lemma1.passed && r1.passed;
    lemma1.max_error = std::max(lemma1.max_error, r1.max_error);

    const Matrix x = normal_matrix(n, d, rng);
    const std::size_t hidden = 1 + rng.below(8);
    const std::size_t out = 1 + rng.below(8);
    const Matrix w_e = normal_matrix(d, hidden, rng);
    const Matrix w_v = normal_matrix(hidden, out, rng);
    const auto b_e = normal_vector(hidden, rng);
    const auto b_v = normal_vector(out, rng);
    const CheckResult r2 = check_lemma2(h, x, w_e, w_v, b_e, b_v);
    lemma2.passed = lemma2.passed && r2.passed;
    lemma2.max_error = std::max(lemma2.max_error, r2.max_error);

    const Matrix w = normal_matrix(d, d, rng);
    const auto b = normal_vector(d, rng);
    const CheckResult r3 = check_weight_tied(h, x, w, b, 2);
    tied.passed = tied.passed && r3.passed;
    tied.max_error = std::max(tied.max_error, r3.max_error);
  }
  lemma1.detail = format("C = A A^T on every instance (max |diff| %.3g)", lemma1.max_error);
  lemma2.detail = format("two linear steps vs collapsed clique step, max |diff| %.3g",
                         lemma2.max_error);
  tied.detail = format("weight-tied HNHN vs star convolution, max |diff| %.3g", tied.max_error);
  return {lemma1, lemma2, tied};
}

std::vector<SuiteCheck> verify_spectral(std::uint64_t seed, std::size_t instances) {
  SuiteCheck squares{"spectral_squares", true, instances, 0.0, {}};
  SuiteCheck symmetry{"spectral_symmetry", true, instances, 0.0, {}};
  SuiteCheck zeros{"spectral_zeros", true, instances, 0.0, {}};
  Rng rng(seed);
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.below(30);
    const std::size_t m = 1 + rng.below(30);
    const Hypergraph h = random_hypergraph(n, m, 8, rng);
    auto mu = symmetric_eigenvalues(clique_adjacency(h));
    const auto lambda = symmetric_eigenvalues(star_adjacency(h));

    // B carries the square roots of C's eigenvalues with both signs, plus
    // m - n zeros when edges outnumber nodes: the extra eigenvalues of the
    // larger Gram matrix A^T A.
    auto is_zero = [](double v) { return std::abs(v) < kSpectralTolerance; };
    const auto zero_b = std::count_if(lambda.begin(), lambda.end(), is_zero);
    const auto zero_c = std::count_if(mu.begin(), mu.end(), is_zero);
    const auto expected_zero_b =
        2 * zero_c + static_cast<std::ptrdiff_t>(m) - static_cast<std::ptrdiff_t>(n);
    if (zero_b != expected_zero_b) zeros.passed = false;
    if (m > n) mu.insert(mu.end(), m - n, 0.0);

    for (const double l : lambda) {
      double best = INFINITY;
      for (const double u : mu) best = std::min(best, std::abs(l * l - u));
      squares.max_error = std::max(squares.max_error, best);
    }
    // Ascending order pairs the k-th smallest with the k-th largest.
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      symmetry.max_error =
          std::max(symmetry.max_error, std::abs(lambda[k] + lambda[lambda.size() - 1 - k]));
    }
  }
  squares.passed = squares.max_error < kSpectralTolerance;
  symmetry.passed = symmetry.max_error < kSpectralTolerance;
  squares.detail = format("max |lambda^2 - mu| = %.3g over eig(C) plus m - n zeros",
                          squares.max_error);
  symmetry.detail = format("max |lambda_k + lambda_(N-k)| = %.3g", symmetry.max_error);
  zeros.detail = zeros.passed ? "zero multiplicity of B equals 2 * zeros(C) + m - n"
                              : "zero multiplicity of B does not match 2 * zeros(C) + m - n";
  return {squares, symmetry, zeros};
}

std::vector<SuiteCheck> verify_fano(std::uint64_t seed) {
  const DistinguishabilityReport d = distinguishability_test(seed);
  SuiteCheck pair{"fano_pair", d.passed, 1, d.clique_max_diff, {}};
  pair.detail = d.passed ? "clique outputs identical, HNHN outputs differ"
                         : "distinguishability failed";
  pair.detail += format(" (clique max |diff| %.3g, HNHN max |diff| %.3g)", d.clique_max_diff,
                        d.hnhn_max_diff);

  const RelabelingCensus c = relabeling_census(fano_plane());
  SuiteCheck census{"fano_census", false, c.permutations, 0.0, {}};
  census.passed = c.permutations == 5040 && c.distinct_hypergraphs == 30 &&
                  c.same_clique_expansion == 30 && c.automorphisms.size() == 168;
  census.detail = std::to_string(c.permutations) + " permutations, " +
                  std::to_string(c.distinct_hypergraphs) + " distinct hypergraphs, " +
                  std::to_string(c.same_clique_expansion) + " with clique expansion K7, " +
                  std::to_string(c.automorphisms.size()) + " automorphisms";
  return {pair, census};
}

}  // namespace hnhn
