#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "hnhn/autodiff.hpp"
#include "hnhn/hypergraph.hpp"
#include "hnhn/model.hpp"

namespace hnhn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates of one parameter, plus the step count.
struct AdamMoments {
  Matrix first;
  Matrix second;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `param` in place. Zero-initializes the
/// moments on the first call. Throws NumericError on a non-finite gradient.
void adam_step(Matrix& param, const Matrix& grad, AdamMoments& state, double lr,
               const AdamConfig& config = {});

/// Adam over a fixed parameter list; reads each tensor's accumulated grad.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, AdamConfig config = {});
  void step(double lr);
  void zero_grad();

 private:
  std::vector<Tensor> params_;
  std::vector<AdamMoments> state_;
  AdamConfig config_;
};

struct TrainConfig {
  std::size_t epochs = 200;
  double lr0 = 0.04;
  double lr_decay = 0.51;
  std::size_t decay_every = 100;
  double dropout = 0.3;
  std::size_t hidden_dim = 400;
  std::size_t n_layers = 2;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  AdamConfig adam;

  /// Throws std::invalid_argument unless epochs >= 1, lr0 > 0,
  /// 0 < lr_decay <= 1 and decay_every >= 1.
  void validate() const;
};

/// lr0 * lr_decay^floor(epoch / decay_every).
double lr_at(std::size_t epoch, const TrainConfig& config);

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

struct RunMetrics {
  std::vector<EpochMetrics> epochs;
  double final_train_acc = 0.0;
  double final_test_acc = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  HnhnModel model;
  RunMetrics metrics;
};

/// Full-graph training on node labels. `labels` has one entry per node (-1
/// for unlabeled); the loss uses `train_rows`, accuracy is also reported on
/// `test_rows`. Deterministic for a fixed config.seed.
TrainResult train_node_classifier(const Hypergraph& h, const Matrix& features,
                                  std::span<const int> labels, std::span<const Id> train_rows,
                                  std::span<const Id> test_rows, const TrainConfig& config);

/// Same loop with the loss on the edge head; `edge_labels` has one entry
/// per hyperedge and the row sets hold edge ids.
TrainResult train_edge_classifier(const Hypergraph& h, const Matrix& features,
                                  std::span<const int> edge_labels,
                                  std::span<const Id> train_edges, std::span<const Id> test_edges,
                                  const TrainConfig& config);

struct CvCell {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation over folds
};

struct CvResult {
  double best_alpha = 0.0;
  double best_beta = 0.0;
  std::vector<CvCell> cells;  // in grid order
};

/// Splits `rows` into `folds` stratified, seeded folds. Every fold's
/// training complement must contain every class present in `rows`; one
/// unstratified reshuffle is attempted before std::runtime_error.
std::vector<std::vector<Id>> make_folds(std::span<const int> labels, std::span<const Id> rows,
                                        std::size_t folds, std::uint64_t seed);

/// k-fold cross-validation of (alpha, beta) on the labeled rows. The best
/// cell maximizes mean held-out accuracy; ties go to the cell closest to
/// (0, 0), then to the lexicographically smaller (alpha, beta).
CvResult cross_validate_alpha_beta(const Hypergraph& h, const Matrix& features,
                                   std::span<const int> labels, std::span<const Id> labeled_rows,
                                   std::span<const std::pair<double, double>> grid,
                                   std::size_t folds, const TrainConfig& config);

/// Default sweep axis values: -1.0 to 1.0 in steps of 0.25.
std::vector<double> default_sweep_values();

/// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> mean_and_std(std::span<const double> values);

/// Per-epoch CSV: header `epoch,loss,train_acc,test_acc`, fixed precision.
void write_metrics_csv(std::ostream& out, const RunMetrics& metrics);
/// Several runs in one file: header `seed,epoch,loss,train_acc,test_acc`,
/// runs in the given order. Throws std::invalid_argument on a size mismatch.
void write_metrics_csv(std::ostream& out, std::span<const std::uint64_t> seeds,
                       std::span<const RunMetrics> runs);

}  // namespace hnhn
