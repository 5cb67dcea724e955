#include "hnhn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hnhn/expansion.hpp"

namespace hnhn {

void ModelConfig::validate() const {
  if (feature_dim == 0) throw std::invalid_argument("model: feature_dim must be positive");
  if (hidden_dim == 0) throw std::invalid_argument("model: hidden_dim must be positive");
  if (n_classes == 0) throw std::invalid_argument("model: n_classes must be positive");
  if (n_layers == 0) throw std::invalid_argument("model: n_layers must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("model: dropout must be in [0, 1)");
  }
}

namespace {

Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

Tensor weight(std::size_t in, std::size_t out, Rng& rng) {
  return Tensor::parameter(uniform_init(in, out, in, rng));
}

Tensor bias(std::size_t in, std::size_t out, Rng& rng) {
  return Tensor::parameter(uniform_init(1, out, in, rng));
}

}  // namespace

HnhnModel::HnhnModel(const ModelConfig& config, Rng& rng) : config_(config) {
  config.validate();
  const std::size_t d = config.hidden_dim;
  input_weight = weight(config.feature_dim, d, rng);
  input_bias = bias(config.feature_dim, d, rng);
  layers.reserve(config.n_layers);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    LayerParams p;
    p.w_e = weight(d, d, rng);
    p.b_e = bias(d, d, rng);
    p.w_v = weight(d, d, rng);
    p.b_v = bias(d, d, rng);
    layers.push_back(std::move(p));
  }
  node_head_weight = weight(d, config.n_classes, rng);
  node_head_bias = bias(d, config.n_classes, rng);
  edge_head_weight = weight(d, config.n_classes, rng);
  edge_head_bias = bias(d, config.n_classes, rng);
}

std::vector<Tensor> HnhnModel::parameters() const {
  std::vector<Tensor> out{input_weight, input_bias};
  for (const auto& p : layers) {
    out.push_back(p.w_e);
    out.push_back(p.b_e);
    out.push_back(p.w_v);
    out.push_back(p.b_v);
  }
  out.push_back(node_head_weight);
  out.push_back(node_head_bias);
  out.push_back(edge_head_weight);
  out.push_back(edge_head_bias);
  return out;
}

HnhnModel HnhnModel::clone() const {
  HnhnModel copy;
  copy.config_ = config_;
  auto dup = [](const Tensor& t) { return Tensor::parameter(t.value()); };
  copy.input_weight = dup(input_weight);
  copy.input_bias = dup(input_bias);
  for (const auto& p : layers) copy.layers.push_back({dup(p.w_e), dup(p.b_e), dup(p.w_v), dup(p.b_v)});
  copy.node_head_weight = dup(node_head_weight);
  copy.node_head_bias = dup(node_head_bias);
  copy.edge_head_weight = dup(edge_head_weight);
  copy.edge_head_bias = dup(edge_head_bias);
  return copy;
}

ForwardOutput forward(Tape& tape, const HnhnModel& model, const Hypergraph& h,
                      const NormalizationTables& tables, const Tensor& features, bool training,
                      Rng& rng, const ForwardHooks& hooks) {
  const ModelConfig& cfg = model.config();
  if (features.rows() != h.num_nodes() || features.cols() != cfg.feature_dim) {
    throw std::invalid_argument("forward: features are " + std::to_string(features.rows()) + "x" +
                                std::to_string(features.cols()) + ", expected " +
                                std::to_string(h.num_nodes()) + "x" +
                                std::to_string(cfg.feature_dim));
  }
  if (tables.node_scale_beta.size() != h.num_nodes() ||
      tables.edge_scale_alpha.size() != h.num_edges()) {
    throw std::invalid_argument("forward: normalization tables built for another hypergraph");
  }
  auto activate = [&](const Tensor& x) {
    return hooks.identity_activation ? identity(tape, x) : relu(tape, x);
  };

  Tensor x_v = add_bias(tape, matmul(tape, features, model.input_weight), model.input_bias);
  // The hyperedge state starts empty and is overwritten by the first layer.
  Tensor x_e = Tensor::constant(Matrix(h.num_edges(), cfg.hidden_dim));

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerParams& p = model.layers[l];
    Tensor node_msg = segment_mean_weighted(tape, x_v, h.edge_to_nodes(), tables.node_scale_beta,
                                            tables.edge_divisor_beta);
    x_e = activate(add_bias(tape, matmul(tape, node_msg, p.w_e), p.b_e));
    Tensor edge_msg = segment_mean_weighted(tape, x_e, h.node_to_edges(), tables.edge_scale_alpha,
                                            tables.node_divisor_alpha);
    x_v = activate(add_bias(tape, matmul(tape, edge_msg, p.w_v), p.b_v));
    if (l + 1 < model.layers.size()) x_v = dropout(tape, x_v, cfg.dropout, training, rng);
  }

  ForwardOutput out;
  out.node_logits =
      add_bias(tape, matmul(tape, x_v, model.node_head_weight), model.node_head_bias);
  out.edge_states = x_e;
  out.node_states = x_v;
  return out;
}

Tensor edge_classify_head(Tape& tape, const HnhnModel& model, const Tensor& edge_states) {
  return add_bias(tape, matmul(tape, edge_states, model.edge_head_weight), model.edge_head_bias);
}

std::vector<int> predict(const Matrix& logits, std::span<const Id> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (Id r : rows) {
    const auto row = logits.row(r);
    // max_element returns the first maximum, i.e. the lowest class id.
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const Id> rows) {
  if (rows.empty()) return 0.0;
  const auto pred = predict(logits, rows);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (pred[k] == labels[rows[k]]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

DistinguishabilityReport distinguishability_test(std::uint64_t seed, std::size_t hidden_dim) {
  const auto [f, f_swapped] = fano_pair();
  ModelConfig cfg;
  cfg.feature_dim = f.num_nodes();
  cfg.hidden_dim = hidden_dim;
  cfg.n_classes = 2;
  cfg.n_layers = 2;
  cfg.dropout = 0.0;
  Rng rng(seed);
  const HnhnModel model(cfg, rng);
  const Tensor one_hot = Tensor::constant(Matrix::identity(f.num_nodes()));

  auto hnhn_states = [&](const Hypergraph& h) {
    Tape tape;
    Rng unused(0);
    return forward(tape, model, h, normalization_tables(h, 0.0, 0.0), one_hot, false, unused)
        .node_states.value();
  };
  auto clique_states = [&](const Hypergraph& h) {
    return graph_convolution_step(clique_adjacency(h), one_hot.value(), model.input_weight.value(),
                                  model.input_bias.value().row(0), true);
  };

  DistinguishabilityReport report;
  report.hnhn_max_diff = max_abs_diff(hnhn_states(f), hnhn_states(f_swapped));
  report.clique_max_diff = max_abs_diff(clique_states(f), clique_states(f_swapped));
  report.passed = report.hnhn_max_diff > kDistinguishThreshold &&
                  report.clique_max_diff < kIndistinguishThreshold;
  return report;
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const HnhnModel& model,
                     const std::map<std::string, std::string>& extra) {
  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write checkpoint " + stem.string() + ".bin");
  for (const Tensor& t : model.parameters()) write_matrix_binary(bin, t.value());

  std::ofstream manifest(with_suffix(stem, ".manifest"));
  if (!manifest) throw std::runtime_error("cannot write checkpoint " + stem.string() + ".manifest");
  const ModelConfig& c = model.config();
  manifest << "feature_dim=" << c.feature_dim << '\n'
           << "hidden_dim=" << c.hidden_dim << '\n'
           << "n_classes=" << c.n_classes << '\n'
           << "n_layers=" << c.n_layers << '\n'
           << "dropout=" << c.dropout << '\n';
  for (const auto& [key, value] : extra) manifest << key << '=' << value << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream manifest_in(with_suffix(stem, ".manifest"));
  if (!manifest_in) throw std::runtime_error("cannot read " + stem.string() + ".manifest");
  std::map<std::string, std::string> manifest;
  std::string line;
  while (std::getline(manifest_in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    manifest[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto field = [&](const char* key) -> std::size_t {
    auto it = manifest.find(key);
    if (it == manifest.end()) throw std::runtime_error(std::string("manifest lacks ") + key);
    return std::stoul(it->second);
  };
  ModelConfig cfg;
  cfg.feature_dim = field("feature_dim");
  cfg.hidden_dim = field("hidden_dim");
  cfg.n_classes = field("n_classes");
  cfg.n_layers = field("n_layers");
  if (auto it = manifest.find("dropout"); it != manifest.end()) cfg.dropout = std::stod(it->second);

  Rng rng(0);
  HnhnModel model(cfg, rng);
  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + stem.string() + ".bin");
  for (Tensor& t : model.parameters()) {
    Matrix m = read_matrix_binary(bin);
    if (!m.same_shape(t.value())) throw std::runtime_error("checkpoint tensor shape mismatch");
    t.mutable_value() = std::move(m);
  }
  return {std::move(model), std::move(manifest)};
}

}  // namespace hnhn
