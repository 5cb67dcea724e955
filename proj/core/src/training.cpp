#include "hnhn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

#include "hnhn/rng.hpp"

namespace hnhn {

void adam_step(Matrix& param, const Matrix& grad, AdamMoments& state, double lr,
               const AdamConfig& config) {
  if (!param.same_shape(grad)) throw std::invalid_argument("adam_step: gradient shape mismatch");
  if (!grad.all_finite()) throw NumericError("adam_step: non-finite gradient");
  if (state.step == 0) {
    state.first = Matrix(param.rows(), param.cols());
    state.second = Matrix(param.rows(), param.cols());
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  double* p = param.data().data();
  double* m = state.first.data().data();
  double* v = state.second.data().data();
  const double* g = grad.data().data();
  const double inv_c1 = 1.0 / correction1;
  const double inv_c2 = 1.0 / correction2;
  for (std::size_t k = 0; k < param.size(); ++k) {
    m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
    v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
    p[k] -= lr * (m[k] * inv_c1) / (std::sqrt(v[k] * inv_c2) + config.epsilon);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), state_(params_.size()), config_(config) {}

void Adam::step(double lr) {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    adam_step(params_[k].mutable_value(), params_[k].grad(), state_[k], lr, config_);
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be at least 1");
  if (!(lr0 > 0.0)) throw std::invalid_argument("train: initial learning rate must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw std::invalid_argument("train: lr_decay must be in (0, 1]");
  }
  if (decay_every < 1) throw std::invalid_argument("train: decay interval must be at least 1");
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  return config.lr0 * std::pow(config.lr_decay, static_cast<double>(epoch / config.decay_every));
}

namespace {

enum class Task { nodes, edges };

std::size_t count_classes(std::span<const int> labels) {
  int max_label = -1;
  for (int y : labels) max_label = std::max(max_label, y);
  if (max_label < 0) throw std::invalid_argument("train: no labeled rows");
  return static_cast<std::size_t>(max_label) + 1;
}

TrainResult run_training(const Hypergraph& h, const Matrix& features, std::span<const int> labels,
                         std::span<const Id> train_rows, std::span<const Id> test_rows,
                         const TrainConfig& config, Task task) {
  config.validate();
  const std::size_t rows = task == Task::nodes ? h.num_nodes() : h.num_edges();
  if (labels.size() != rows) {
    throw std::invalid_argument("train: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(rows) + " rows");
  }
  if (train_rows.empty()) throw std::invalid_argument("train: empty training mask");
  for (auto set : {train_rows, test_rows}) {
    for (Id r : set) {
      if (r >= rows || labels[r] < 0) {
        throw std::invalid_argument("train: row " + std::to_string(r) + " has no valid label");
      }
    }
  }

  Rng rng(config.seed);
  Rng init_rng = rng.split();
  Rng dropout_rng = rng.split();

  ModelConfig model_config;
  model_config.feature_dim = features.cols();
  model_config.hidden_dim = config.hidden_dim;
  model_config.n_classes = count_classes(labels);
  model_config.n_layers = config.n_layers;
  model_config.dropout = config.dropout;
  HnhnModel model(model_config, init_rng);

  const NormalizationTables tables = normalization_tables(h, config.alpha, config.beta);
  const Tensor x = Tensor::constant(features);
  Adam optimizer(model.parameters(), config.adam);

  auto logits_of = [&](Tape& tape, const ForwardOutput& out) {
    return task == Task::nodes ? out.node_logits : edge_classify_head(tape, model, out.edge_states);
  };

  RunMetrics metrics;
  metrics.epochs.reserve(config.epochs);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochMetrics em;
    em.epoch = epoch;
    {
      Tape tape;
      const ForwardOutput out = forward(tape, model, h, tables, x, true, dropout_rng);
      const Tensor loss = softmax_cross_entropy(tape, logits_of(tape, out), labels, train_rows);
      em.loss = loss.item();
      optimizer.zero_grad();
      tape.backward(loss);
      optimizer.step(lr_at(epoch, config));
    }
    {
      Tape tape;
      const ForwardOutput out = forward(tape, model, h, tables, x, false, dropout_rng);
      const Matrix logits = logits_of(tape, out).value();
      em.train_acc = accuracy(logits, labels, train_rows);
      em.test_acc = accuracy(logits, labels, test_rows);
    }
    metrics.epochs.push_back(em);
  }
  optimizer.zero_grad();
  metrics.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  metrics.final_train_acc = metrics.epochs.back().train_acc;
  metrics.final_test_acc = metrics.epochs.back().test_acc;
  return {std::move(model), std::move(metrics)};
}

}  // namespace

TrainResult train_node_classifier(const Hypergraph& h, const Matrix& features,
                                  std::span<const int> labels, std::span<const Id> train_rows,
                                  std::span<const Id> test_rows, const TrainConfig& config) {
  if (features.rows() != h.num_nodes()) {
    throw std::invalid_argument("train: feature rows do not match hypergraph nodes");
  }
  return run_training(h, features, labels, train_rows, test_rows, config, Task::nodes);
}

TrainResult train_edge_classifier(const Hypergraph& h, const Matrix& features,
                                  std::span<const int> edge_labels,
                                  std::span<const Id> train_edges, std::span<const Id> test_edges,
                                  const TrainConfig& config) {
  if (features.rows() != h.num_nodes()) {
    throw std::invalid_argument("train: feature rows do not match hypergraph nodes");
  }
  return run_training(h, features, edge_labels, train_edges, test_edges, config, Task::edges);
}

namespace {

bool folds_cover_classes(std::span<const int> labels, const std::vector<std::vector<Id>>& folds) {
  std::map<int, std::size_t> total;
  for (const auto& fold : folds)
    for (Id r : fold) ++total[labels[r]];
  for (const auto& fold : folds) {
    std::map<int, std::size_t> held;
    for (Id r : fold) ++held[labels[r]];
    for (const auto& [cls, count] : total)
      if (held[cls] == count) return false;  // class missing from the training complement
  }
  return true;
}

}  // namespace

std::vector<std::vector<Id>> make_folds(std::span<const int> labels, std::span<const Id> rows,
                                        std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (rows.size() < folds) {
    throw std::invalid_argument("cross-validation: fewer labeled rows than folds");
  }
  Rng rng(seed);
  std::map<int, std::vector<Id>> by_class;
  for (Id r : rows) by_class[labels[r]].push_back(r);

  std::vector<std::vector<Id>> out(folds);
  std::size_t next = 0;
  for (auto& [cls, members] : by_class) {
    shuffle(members, rng);
    for (Id r : members) out[next++ % folds].push_back(r);
  }
  if (folds_cover_classes(labels, out)) return out;

  std::vector<Id> all(rows.begin(), rows.end());
  shuffle(all, rng);
  out.assign(folds, {});
  for (std::size_t k = 0; k < all.size(); ++k) out[k % folds].push_back(all[k]);
  if (folds_cover_classes(labels, out)) return out;
  throw std::runtime_error("cross-validation: a class is absent from some training split");
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

CvResult cross_validate_alpha_beta(const Hypergraph& h, const Matrix& features,
                                   std::span<const int> labels, std::span<const Id> labeled_rows,
                                   std::span<const std::pair<double, double>> grid,
                                   std::size_t folds, const TrainConfig& config) {
  if (grid.empty()) throw std::invalid_argument("cross-validation: empty (alpha, beta) grid");
  const auto fold_rows = make_folds(labels, labeled_rows, folds, config.seed);

  CvResult result;
  for (const auto& [alpha, beta] : grid) {
    CvCell cell;
    cell.alpha = alpha;
    cell.beta = beta;
    for (std::size_t k = 0; k < folds; ++k) {
      std::vector<Id> train;
      for (std::size_t other = 0; other < folds; ++other)
        if (other != k) train.insert(train.end(), fold_rows[other].begin(), fold_rows[other].end());
      std::sort(train.begin(), train.end());
      TrainConfig cfg = config;
      cfg.alpha = alpha;
      cfg.beta = beta;
      cfg.seed = config.seed + 0x9e3779b97f4a7c15ULL * (k + 1);
      const auto run = train_node_classifier(h, features, labels, train, fold_rows[k], cfg);
      cell.fold_accuracy.push_back(run.metrics.final_test_acc);
    }
    std::tie(cell.mean_accuracy, cell.std_accuracy) = mean_and_std(cell.fold_accuracy);
    result.cells.push_back(std::move(cell));
  }

  auto better = [](const CvCell& a, const CvCell& b) {
    if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
    const double ra = a.alpha * a.alpha + a.beta * a.beta;
    const double rb = b.alpha * b.alpha + b.beta * b.beta;
    if (ra != rb) return ra < rb;
    return std::pair{a.alpha, a.beta} < std::pair{b.alpha, b.beta};
  };
  const CvCell* best = &result.cells.front();
  for (const auto& cell : result.cells)
    if (better(cell, *best)) best = &cell;
  result.best_alpha = best->alpha;
  result.best_beta = best->beta;
  return result;
}

std::vector<double> default_sweep_values() {
  return {-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0};
}

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics) {
  out << "epoch,loss,train_acc,test_acc\n";
  char buf[128];
  for (const auto& e : metrics.epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.10f,%.6f,%.6f\n", e.epoch, e.loss, e.train_acc,
                  e.test_acc);
    out << buf;
  }
}

void write_metrics_csv(std::ostream& out, std::span<const std::uint64_t> seeds,
                       std::span<const RunMetrics> runs) {
  if (seeds.size() != runs.size())
    throw std::invalid_argument("write_metrics_csv: one seed per run required");
  out << "seed,epoch,loss,train_acc,test_acc\n";
  char buf[160];
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& e : runs[r].epochs) {
      std::snprintf(buf, sizeof buf, "%llu,%zu,%.10f,%.6f,%.6f\n",
                    static_cast<unsigned long long>(seeds[r]), e.epoch, e.loss, e.train_acc,
                    e.test_acc);
      out << buf;
    }
  }
}

}  // namespace hnhn
