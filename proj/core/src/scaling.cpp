#include "hnhn/scaling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "hnhn/autodiff.hpp"
#include "hnhn/model.hpp"
#include "hnhn/rng.hpp"
#include "hnhn/synthetic.hpp"

namespace hnhn {

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_loglog_slope: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_loglog_slope: x values are all equal");
  return (n * sxy - sx * sy) / denom;
}

ScalingReport measure_scaling(const ScalingOptions& options) {
  if (options.repetitions == 0) throw std::invalid_argument("scaling: repetitions must be >= 1");
  Rng rng(options.seed);
  ScalingReport report;
  for (std::size_t factor : options.factors) {
    const std::size_t n = options.base_nodes * factor;
    const auto m = static_cast<std::size_t>(options.edges_per_node * static_cast<double>(n));
    const Hypergraph h = random_hypergraph(n, m, options.max_edge_size, rng);
    const NormalizationTables tables = normalization_tables(h, 0.0, 0.0);

    Matrix features(n, options.feature_dim);
    for (double& v : features.data()) v = rng.normal();
    const Tensor x = Tensor::constant(std::move(features));
    std::vector<int> labels(n);
    std::vector<Id> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(i % 2);
      rows[i] = static_cast<Id>(i);
    }

    ModelConfig cfg;
    cfg.feature_dim = options.feature_dim;
    cfg.hidden_dim = options.hidden_dim;
    cfg.n_classes = 2;
    cfg.n_layers = 2;
    cfg.dropout = 0.0;
    Rng init = rng.split();
    HnhnModel model(cfg, init);

    auto step = [&] {
      Tape tape;
      Rng unused(0);
      const auto out = forward(tape, model, h, tables, x, true, unused);
      tape.backward(softmax_cross_entropy(tape, out.node_logits, labels, rows));
      for (Tensor& p : model.parameters()) p.zero_grad();
    };

    step();  // warm-up
    std::vector<double> times;
    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      step();
      times.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
    report.points.push_back({n, h.num_edges(), h.num_incidences(), times[times.size() / 2]});
  }

  std::vector<double> xs, ys;
  for (const auto& p : report.points) {
    xs.push_back(static_cast<double>(p.incidences));
    ys.push_back(p.seconds);
  }
  report.exponent = fit_loglog_slope(xs, ys);
  return report;
}

}  // namespace hnhn
