#include <benchmark/benchmark.h>

#include <vector>

#include "hnhn/aggregate.hpp"
#include "hnhn/autodiff.hpp"
#include "hnhn/model.hpp"
#include "hnhn/rng.hpp"
#include "hnhn/synthetic.hpp"

namespace {

using namespace hnhn;

Matrix random_features(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

// Node-to-edge aggregation; argument is the node count, with n / 2 edges.
void BM_SegmentSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Hypergraph h = random_hypergraph(n, n / 2, 8, rng);
  const NormalizationTables t = normalization_tables(h, 0.5, -0.5);
  const Matrix x = random_features(n, 64, rng);
  for (auto _ : state) {
    Matrix out = weighted_segment_sum(x, h.edge_to_nodes(), t.node_scale_beta, t.edge_divisor_beta);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.counters["incidences"] = static_cast<double>(h.num_incidences());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(h.num_incidences()));
}
BENCHMARK(BM_SegmentSum)->RangeMultiplier(2)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMicrosecond);

void BM_SegmentSumBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Hypergraph h = random_hypergraph(n, n / 2, 8, rng);
  const NormalizationTables t = normalization_tables(h, 0.5, -0.5);
  const Matrix g = random_features(h.num_edges(), 64, rng);
  Matrix grad(n, 64);
  for (auto _ : state) {
    weighted_segment_sum_backward(g, h.edge_to_nodes(), t.node_scale_beta, t.edge_divisor_beta,
                                  grad);
    benchmark::DoNotOptimize(grad.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(h.num_incidences()));
}
BENCHMARK(BM_SegmentSumBackward)->RangeMultiplier(2)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMicrosecond);

// One training step of a 2-layer model: forward, loss, backward.
void BM_ForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto hidden = static_cast<std::size_t>(state.range(1));
  Rng rng(3);
  const Hypergraph h = random_hypergraph(n, n / 2, 8, rng);
  const NormalizationTables t = normalization_tables(h, 0.0, 0.0);
  const Tensor x = Tensor::constant(random_features(n, 32, rng));
  std::vector<int> labels(n);
  std::vector<Id> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % 2);
    rows[i] = static_cast<Id>(i);
  }
  ModelConfig cfg;
  cfg.feature_dim = 32;
  cfg.hidden_dim = hidden;
  cfg.n_classes = 2;
  Rng init(4);
  HnhnModel model(cfg, init);
  Rng drop(5);
  for (auto _ : state) {
    Tape tape;
    const auto out = forward(tape, model, h, t, x, true, drop);
    tape.backward(softmax_cross_entropy(tape, out.node_logits, labels, rows));
    for (Tensor& p : model.parameters()) p.zero_grad();
  }
  state.counters["incidences"] = static_cast<double>(h.num_incidences());
}
BENCHMARK(BM_ForwardBackward)
    ->ArgsProduct({{1000, 2000, 4000, 8000}, {64}})
    ->Args({2000, 400})
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
