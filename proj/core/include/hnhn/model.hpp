#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hnhn/autodiff.hpp"
#include "hnhn/hypergraph.hpp"
#include "hnhn/rng.hpp"

namespace hnhn {

struct ModelConfig {
  std::size_t feature_dim = 0;
  std::size_t hidden_dim = 400;
  std::size_t n_classes = 0;
  std::size_t n_layers = 2;
  double dropout = 0.3;

  /// Throws std::invalid_argument if any dimension is zero or dropout is
  /// outside [0, 1).
  void validate() const;
};

/// Per-layer parameters: node -> edge transform (E) and edge -> node (V).
struct LayerParams {
  Tensor w_e, b_e;
  Tensor w_v, b_v;
};

/// HNHN network: linear input projection, `n_layers` hypernode/hyperedge
/// convolutions and two linear heads (node and edge classification).
///
/// Parameter tensors share storage on copy, so the class is move-only;
/// use clone() for an independent copy.
class HnhnModel {
 public:
  /// Weights and biases drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  HnhnModel(const ModelConfig& config, Rng& rng);

  HnhnModel(HnhnModel&&) = default;
  HnhnModel& operator=(HnhnModel&&) = default;
  HnhnModel(const HnhnModel&) = delete;
  HnhnModel& operator=(const HnhnModel&) = delete;

  HnhnModel clone() const;

  const ModelConfig& config() const { return config_; }

  /// Every trainable tensor in a fixed order (also the checkpoint order).
  std::vector<Tensor> parameters() const;

  Tensor input_weight, input_bias;
  std::vector<LayerParams> layers;
  Tensor node_head_weight, node_head_bias;
  Tensor edge_head_weight, edge_head_bias;

 private:
  HnhnModel() = default;
  ModelConfig config_;
};

struct ForwardOutput {
  Tensor node_logits;  // n x n_classes
  Tensor edge_states;  // m x hidden_dim, after the last layer
  Tensor node_states;  // n x hidden_dim, after the last layer
};

/// Switches used only by tests to reach the closed forms of the lemmas.
struct ForwardHooks {
  bool identity_activation = false;
};

/// Runs the network. Per layer:
///   X_E = relu(segment_mean(X_V; edge_to_nodes, node_scale_beta, edge_divisor_beta) W_E + b_E)
///   X_V = relu(segment_mean(X_E; node_to_edges, edge_scale_alpha, node_divisor_alpha) W_V + b_V)
/// with dropout on X_V after every layer but the last when `training`.
/// The hypergraph and tables must outlive any backward pass on `tape`.
ForwardOutput forward(Tape& tape, const HnhnModel& model, const Hypergraph& h,
                      const NormalizationTables& tables, const Tensor& features, bool training,
                      Rng& rng, const ForwardHooks& hooks = {});

/// Edge classification logits from the final hyperedge states.
Tensor edge_classify_head(Tape& tape, const HnhnModel& model, const Tensor& edge_states);

/// Row-wise argmax over the selected rows; ties go to the lowest class id.
std::vector<int> predict(const Matrix& logits, std::span<const Id> rows);

/// Fraction of `rows` whose argmax matches `labels[row]`; 0 for no rows.
double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const Id> rows);

struct DistinguishabilityReport {
  bool passed = false;
  double hnhn_max_diff = 0.0;    // node states on F vs F'
  double clique_max_diff = 0.0;  // clique-expansion convolution on F vs F'
};

inline constexpr double kDistinguishThreshold = 1e-6;
inline constexpr double kIndistinguishThreshold = 1e-12;

/// Feeds one-hot node identities through a seeded HNHN (alpha = beta = 0,
/// inference mode) and through one clique-expansion graph convolution that
/// reuses the HNHN input projection as its weights. Passes when HNHN tells
/// the Fano pair apart and the clique convolution does not.
DistinguishabilityReport distinguishability_test(std::uint64_t seed, std::size_t hidden_dim = 16);

/// Writes `<stem>.bin` (parameters back to back in the flat matrix binary
/// layout) and `<stem>.manifest` (key=value lines). `extra` entries such as
/// alpha, beta and seed are appended to the manifest.
void save_checkpoint(const std::filesystem::path& stem, const HnhnModel& model,
                     const std::map<std::string, std::string>& extra = {});

struct Checkpoint {
  HnhnModel model;
  std::map<std::string, std::string> manifest;
};
Checkpoint load_checkpoint(const std::filesystem::path& stem);

}  // namespace hnhn
