// Acceptance runner: one PASS, FAIL or SKIP line per criterion.
//
// Usage: hnhn_acceptance [--cli PATH_TO_HNHN]
// Exit status is nonzero when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "hnhn/aggregate.hpp"
#include "hnhn/data.hpp"
#include "hnhn/gradcheck.hpp"
#include "hnhn/model.hpp"
#include "hnhn/scaling.hpp"
#include "hnhn/synthetic.hpp"
#include "hnhn/training.hpp"
#include "hnhn/verify.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hnhn;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Status::pass : Status::fail, std::move(detail)};
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome from_checks(const std::vector<SuiteCheck>& checks) {
  bool ok = true;
  std::string detail;
  for (const SuiteCheck& c : checks) {
    ok = ok && c.passed;
    if (!detail.empty()) detail += "; ";
    detail += c.name + (c.passed ? " ok" : " FAILED") + " (" + c.detail + ")";
  }
  return verdict(ok, detail);
}

// --- criteria --------------------------------------------------------------

Outcome lemma_suite() { return from_checks(verify_lemmas(0, 100)); }

Outcome fano() { return from_checks(verify_fano(0)); }

Outcome spectral() { return from_checks(verify_spectral(0, 20)); }

Outcome gradients() {
  const GradCheckReport r = gradient_check(GradCheckOptions::small());
  const bool all = r.parameters.size() == 14;  // input, 2 x 4 layer tensors, 2 heads x 2
  return verdict(r.passed && all,
                 std::to_string(r.parameters.size()) + " parameter tensors on a 10-node fixture, " +
                     fmt("max relative error %.3e (limit 1e-4)", r.max_relative_error));
}

// Gather/scatter in both directions against D^-1 A^T W X and D^-1 A W X,
// with the normalization diagonals rebuilt from the dense incidence.
Outcome message_passing() {
  Rng rng(5);
  double worst_fwd = 0.0, worst_bwd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    const Hypergraph h = random_hypergraph(n, 1 + rng.below(20), 6, rng);
    const Matrix a = oracle::incidence(h.edges(), n);
    const Matrix at = transpose(a);
    const double alpha = rng.uniform(-1.5, 1.5), beta = rng.uniform(-1.5, 1.5);
    const NormalizationTables t = normalization_tables(h, alpha, beta);

    const auto node_w = oracle::powers(oracle::row_sums(a), beta);
    const auto edge_w = oracle::powers(oracle::column_sums(a), alpha);
    const Matrix to_edges = oracle::naive_matmul(
        oracle::inverse_diag(oracle::edge_divisor(a, beta)),
        oracle::naive_matmul(at, oracle::diag(node_w)));
    const Matrix to_nodes = oracle::naive_matmul(
        oracle::inverse_diag(oracle::node_divisor(a, alpha)),
        oracle::naive_matmul(a, oracle::diag(edge_w)));

    const std::size_t d = 1 + rng.below(6);
    const Matrix xv = oracle::random_matrix(n, d, rng);
    const Matrix xe = oracle::random_matrix(h.num_edges(), d, rng);
    worst_fwd = std::max(worst_fwd,
                         max_abs_diff(weighted_segment_sum(xv, h.edge_to_nodes(), t.node_scale_beta,
                                                           t.edge_divisor_beta),
                                      oracle::naive_matmul(to_edges, xv)));
    worst_fwd = std::max(worst_fwd,
                         max_abs_diff(weighted_segment_sum(xe, h.node_to_edges(), t.edge_scale_alpha,
                                                           t.node_divisor_alpha),
                                      oracle::naive_matmul(to_nodes, xe)));

    // Backward of a linear map M is multiplication by its transpose.
    const Matrix ge = oracle::random_matrix(h.num_edges(), d, rng);
    const Matrix gv = oracle::random_matrix(n, d, rng);
    Matrix grad_v(n, d), grad_e(h.num_edges(), d);
    weighted_segment_sum_backward(ge, h.edge_to_nodes(), t.node_scale_beta, t.edge_divisor_beta,
                                  grad_v);
    weighted_segment_sum_backward(gv, h.node_to_edges(), t.edge_scale_alpha,
                                  t.node_divisor_alpha, grad_e);
    worst_bwd = std::max(worst_bwd,
                         max_abs_diff(grad_v, oracle::naive_matmul(transpose(to_edges), ge)));
    worst_bwd = std::max(worst_bwd,
                         max_abs_diff(grad_e, oracle::naive_matmul(transpose(to_nodes), gv)));
  }
  return verdict(worst_fwd < 1e-10 && worst_bwd < 1e-10,
                 fmt("100 instances, forward max |diff| %.3g, backward max |diff| %.3g", worst_fwd,
                     worst_bwd));
}

// One HNHN layer at alpha = beta = 0 against edge means then node means.
Outcome degeneration() {
  Rng rng(6);
  double worst = 0.0;
  int instances = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Hypergraph h = prune(random_hypergraph(12, 9, 5, rng), true, false).graph;
    if (h.num_nodes() == 0) continue;
    ++instances;
    ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.hidden_dim = 5;
    cfg.n_classes = 2;
    cfg.n_layers = 1;
    cfg.dropout = 0.0;
    Rng init(1000 + static_cast<std::uint64_t>(trial));
    const HnhnModel model(cfg, init);
    const Matrix x = oracle::random_matrix(h.num_nodes(), 4, rng);

    Tape tape;
    Rng unused(0);
    const Matrix got = forward(tape, model, h, normalization_tables(h, 0.0, 0.0),
                               Tensor::constant(x), false, unused)
                           .node_states.value();

    auto affine_relu = [](const Matrix& in, const Matrix& w, const Matrix& b, bool relu) {
      Matrix out = oracle::naive_matmul(in, w);
      for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) {
          out(r, c) += b(0, c);
          if (relu) out(r, c) = std::max(0.0, out(r, c));
        }
      return out;
    };
    // Plain means: every edge averages its members, every node its edges.
    const Matrix x0 = affine_relu(x, model.input_weight.value(), model.input_bias.value(), false);
    Matrix edge_mean(h.num_edges(), x0.cols());
    for (std::size_t j = 0; j < h.num_edges(); ++j) {
      const auto members = h.edge_to_nodes()[j];
      for (const Id i : members)
        for (std::size_t c = 0; c < x0.cols(); ++c)
          edge_mean(j, c) += x0(i, c) / static_cast<double>(members.size());
    }
    const auto& p = model.layers[0];
    const Matrix xe = affine_relu(edge_mean, p.w_e.value(), p.b_e.value(), true);
    Matrix node_mean(h.num_nodes(), xe.cols());
    for (std::size_t i = 0; i < h.num_nodes(); ++i) {
      const auto incident = h.node_to_edges()[i];
      for (const Id j : incident)
        for (std::size_t c = 0; c < xe.cols(); ++c)
          node_mean(i, c) += xe(j, c) / static_cast<double>(incident.size());
    }
    const Matrix want = affine_relu(node_mean, p.w_v.value(), p.b_v.value(), true);
    worst = std::max(worst, max_abs_diff(got, want));
  }
  return verdict(worst < 1e-12 && instances > 0,
                 std::to_string(instances) + fmt(" instances, max |diff| %.3g (limit 1e-12)", worst));
}

Outcome planted_learning() {
  int good = 0;
  std::string accs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PlantedConfig pc;
    pc.seed = seed;
    const PlantedDataset d = planted_communities(pc);
    const LabelSplit split = split_labeled(d.labels, 0.1, seed);
    TrainConfig cfg;
    cfg.seed = seed;
    const TrainResult r =
        train_node_classifier(d.graph, d.features, d.labels, split.train, split.test, cfg);
    if (r.metrics.final_test_acc >= 0.9) ++good;
    accs += (accs.empty() ? "" : " ") + fmt("%.3f", r.metrics.final_test_acc);
  }
  return verdict(good >= 4, std::to_string(good) + "/5 seeds reach 0.9 test accuracy [" + accs + "]");
}

Outcome citeseer() {
  const char* dir_env = std::getenv("HNHN_CITESEER_DIR");
  if (dir_env == nullptr || *dir_env == '\0')
    return {Status::skip, "HNHN_CITESEER_DIR not set; CiteSeer cocitation data unavailable"};
  const fs::path dir(dir_env);
  const Corpus corpus =
      read_corpus(dir / "docs.tsv", dir / "relations.tsv", dir / "labels.tsv");
  const IngestedHypergraph ing = build_cocitation_hypergraph(corpus);
  std::vector<std::string> texts;
  std::vector<int> labels;
  for (const std::size_t doc : ing.node_doc) {
    texts.push_back(corpus.texts[doc]);
    labels.push_back(corpus.labels[doc]);
  }
  FeatureOptions fo;
  fo.mode = FeatureMode::bow;
  const Matrix features = tfidf_features(texts, fo).values;
  const std::vector<int> edge_labels = cocitation_edge_labels(corpus, ing);

  std::vector<double> node_acc, edge_acc;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    const LabelSplit s = split_labeled(labels, 0.15, seed);
    node_acc.push_back(
        train_node_classifier(ing.graph, features, labels, s.train, s.test, cfg)
            .metrics.final_test_acc);
    const LabelSplit se = split_labeled(edge_labels, 0.15, seed);
    edge_acc.push_back(
        train_edge_classifier(ing.graph, features, edge_labels, se.train, se.test, cfg)
            .metrics.final_test_acc);
  }
  const auto [nm, ns] = mean_and_std(node_acc);
  const auto [em, es] = mean_and_std(edge_acc);
  const bool ok = std::abs(100.0 * nm - 64.8) <= 5.0 && std::abs(100.0 * em - 62.79) <= 5.0;
  return verdict(ok, "n=" + std::to_string(ing.graph.num_nodes()) +
                         " m=" + std::to_string(ing.graph.num_edges()) +
                         fmt(", node %.2f +- %.2f (target 64.8 +- 5)", 100 * nm, 100 * ns) +
                         fmt(", edge %.2f +- %.2f (target 62.79 +- 5)", 100 * em, 100 * es));
}

Outcome scaling() {
  const ScalingReport r = measure_scaling(ScalingOptions{});
  std::string pts;
  for (const ScalingPoint& p : r.points)
    pts += (pts.empty() ? "" : ", ") + std::to_string(p.incidences) + fmt(" inc %.4f s", p.seconds);
  return verdict(r.exponent <= 1.5, fmt("exponent %.3f (limit 1.5) over ", r.exponent) + pts);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {Status::skip, "no --cli binary given"};
  const fs::path dir = fs::temp_directory_path() / ("hnhn_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  PlantedConfig pc;
  pc.seed = 11;
  const PlantedDataset d = planted_communities(pc);
  save_dataset(dir / "data", d.graph, d.features, d.labels);

  auto run = [&](const std::string& name) {
    const std::string cmd = "\"" + cli + "\" train --data \"" + (dir / "data").string() +
                            "\" --label-rate 0.1 --seed 7 --out \"" + (dir / name).string() +
                            "\" > /dev/null";
    return std::system(cmd.c_str());
  };
  const int rc_a = run("a.csv");
  const int rc_b = run("b.csv");
  const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
  fs::remove_all(dir);
  if (rc_a != 0 || rc_b != 0) return {Status::fail, "hnhn train exited with an error"};
  return verdict(!a.empty() && a == b,
                 "two `hnhn train` runs with seed 7: " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " bytes, " + (a == b ? "identical" : "different"));
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--cli PATH]\n", argv[0]);
      return 2;
    }
  }

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0 for no time limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "lemma suite", 10.0, lemma_suite},
      {2, "Fano distinguishability", 60.0, fano},
      {3, "spectral relation", 0.0, spectral},
      {4, "gradient fidelity", 0.0, gradients},
      {5, "message passing vs dense oracle", 0.0, message_passing},
      {6, "normalization degeneration", 0.0, degeneration},
      {7, "planted-community learning", 60.0, planted_learning},
      {8, "CiteSeer reproduction", 0.0, citeseer},
      {9, "complexity scaling", 0.0, scaling},
      {10, "determinism", 0.0, [&] { return determinism(cli); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Status::pass && c.limit_seconds > 0.0 && secs >= c.limit_seconds) {
      o.status = Status::fail;
      o.detail += fmt("; took %.1f s, limit %.0f s", secs, c.limit_seconds);
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::skip ? "SKIP" : "FAIL";
    if (o.status == Status::fail) ++failures;
    std::printf("%s %2d %s: %s (%.2f s)\n", tag, c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
