#include "hnhn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hnhn/autodiff.hpp"
#include "hnhn/model.hpp"
#include "hnhn/rng.hpp"

namespace hnhn {

GradCheckOptions GradCheckOptions::small() { return {}; }

GradCheckOptions GradCheckOptions::medium() {
  GradCheckOptions o;
  o.nodes = 30;
  o.extra_edges = 10;
  o.feature_dim = 8;
  o.hidden_dim = 12;
  return o;
}

namespace {

// Chunks a shuffled node order into edges of 2-4 members, then adds extra
// random edges. Every node is covered and no edge is a singleton.
Hypergraph covering_hypergraph(std::size_t n, std::size_t extra, Rng& rng) {
  if (n < 2) throw std::invalid_argument("gradcheck: need at least two nodes");
  std::vector<Id> order(n);
  std::iota(order.begin(), order.end(), Id{0});
  shuffle(order, rng);
  std::vector<std::vector<Id>> edges;
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t size = 2 + rng.below(3);
    if (n - pos < size + 2) size = n - pos;  // avoid a trailing singleton
    edges.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                       order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  for (std::size_t e = 0; e < extra; ++e) {
    shuffle(order, rng);
    const std::size_t size = std::min<std::size_t>(n, 2 + rng.below(3));
    edges.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
  }
  return Hypergraph::from_edges(edges, n);
}

std::vector<std::string> parameter_names(const HnhnModel& model) {
  std::vector<std::string> names{"input.weight", "input.bias"};
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    for (const char* s : {"w_e", "b_e", "w_v", "b_v"}) names.push_back(p + s);
  }
  for (const char* s : {"node_head.weight", "node_head.bias", "edge_head.weight", "edge_head.bias"})
    names.emplace_back(s);
  return names;
}

}  // namespace

GradCheckReport gradient_check(const GradCheckOptions& options) {
  Rng rng(options.seed);
  const Hypergraph h = covering_hypergraph(options.nodes, options.extra_edges, rng);
  const NormalizationTables tables = normalization_tables(h, options.alpha, options.beta);

  Matrix features(h.num_nodes(), options.feature_dim);
  for (double& v : features.data()) v = rng.normal();
  const Tensor x = Tensor::constant(std::move(features));

  const auto classes = static_cast<std::uint64_t>(options.n_classes);
  std::vector<int> node_labels(h.num_nodes()), edge_labels(h.num_edges());
  for (int& y : node_labels) y = static_cast<int>(rng.below(classes));
  for (int& y : edge_labels) y = static_cast<int>(rng.below(classes));
  std::vector<Id> node_rows(h.num_nodes()), edge_rows(h.num_edges());
  std::iota(node_rows.begin(), node_rows.end(), Id{0});
  std::iota(edge_rows.begin(), edge_rows.end(), Id{0});

  ModelConfig cfg;
  cfg.feature_dim = options.feature_dim;
  cfg.hidden_dim = options.hidden_dim;
  cfg.n_classes = options.n_classes;
  cfg.n_layers = options.n_layers;
  cfg.dropout = 0.0;
  Rng init = rng.split();
  HnhnModel model(cfg, init);

  auto loss_on = [&](Tape& tape) {
    Rng unused(0);
    const ForwardOutput out = forward(tape, model, h, tables, x, false, unused);
    const Tensor node_loss = softmax_cross_entropy(tape, out.node_logits, node_labels, node_rows);
    const Tensor edge_loss = softmax_cross_entropy(
        tape, edge_classify_head(tape, model, out.edge_states), edge_labels, edge_rows);
    // Both losses are 1 x 1, so broadcasting one as a bias adds them.
    return add_bias(tape, node_loss, edge_loss);
  };

  auto params = model.parameters();
  for (Tensor& p : params) p.zero_grad();
  {
    Tape tape;
    tape.backward(loss_on(tape));
  }

  const auto names = parameter_names(model);
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    const Matrix analytic = p.grad();
    ParameterCheck check{names[k], p.value().size(), 0.0};
    for (std::size_t e = 0; e < p.value().size(); ++e) {
      double& slot = p.mutable_value().data()[e];
      const double saved = slot;
      slot = saved + options.step;
      Tape up_tape;
      const double up = loss_on(up_tape).item();
      slot = saved - options.step;
      Tape down_tape;
      const double down = loss_on(down_tape).item();
      slot = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic.data()[e];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      check.max_relative_error = std::max(check.max_relative_error, std::abs(a - numeric) / denom);
    }
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.parameters.push_back(std::move(check));
  }
  for (Tensor& p : params) p.zero_grad();
  report.passed = report.max_relative_error < kGradCheckTolerance;
  return report;
}

}  // namespace hnhn
