// hnhn: command-line front end for ingestion, training, sweeps and checks.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hnhn/data.hpp"
#include "hnhn/expansion.hpp"
#include "hnhn/gradcheck.hpp"
#include "hnhn/scaling.hpp"
#include "hnhn/training.hpp"
#include "hnhn/verify.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using namespace hnhn;

namespace {

// A failed run: reported on stderr, exit code 1.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
      throw std::invalid_argument("not a number: '" + item + "'");
    values.push_back(v);
  }
  if (values.empty() || text.back() == ',') throw std::invalid_argument("empty grid entry");
  return values;
}

const CLI::Validator kGridList(
    [](std::string& s) -> std::string {
      try {
        parse_grid(s);
      } catch (const std::invalid_argument& e) {
        return std::string("malformed grid: ") + e.what();
      }
      return {};
    },
    "LIST", "comma-separated numbers");

// --- ingest ----------------------------------------------------------------

struct IngestArgs {
  fs::path docs, relations, labels, out;
  std::string mode = "cocite";
  std::string features = "tfidf";
  std::size_t vocab = 1000;
  double max_df = 0.2;
  std::size_t ngram = 2;
};

int run_ingest(const IngestArgs& a) {
  const Corpus corpus = read_corpus(a.docs, a.relations, a.labels);
  const IngestedHypergraph ing = a.mode == "coauthor" ? build_coauthorship_hypergraph(corpus)
                                                      : build_cocitation_hypergraph(corpus);
  const Hypergraph& h = ing.graph;

  std::vector<std::string> texts, node_ids;
  std::vector<int> labels;
  for (const std::size_t doc : ing.node_doc) {
    texts.push_back(corpus.texts[doc]);
    node_ids.push_back(corpus.doc_ids[doc]);
    labels.push_back(corpus.labels[doc]);
  }
  FeatureOptions fo;
  fo.vocab_size = a.vocab;
  fo.max_doc_freq = a.max_df;
  fo.max_ngram = a.ngram;
  fo.mode = a.features == "bow" ? FeatureMode::bow : FeatureMode::tfidf;
  const FeatureMatrix fm = tfidf_features(texts, fo);

  std::vector<int> edge_labels;
  if (a.mode == "cocite") {
    edge_labels = cocitation_edge_labels(corpus, ing);
    if (std::all_of(edge_labels.begin(), edge_labels.end(), [](int y) { return y < 0; }))
      edge_labels.clear();
  }

  save_dataset(a.out, h, fm.values, labels, edge_labels);
  write_lines(a.out / "vocab.txt", fm.vocabulary);
  write_lines(a.out / "classes.txt", corpus.class_names);
  write_lines(a.out / "node_ids.txt", node_ids);

  const DegreeStats s = degree_stats(h);
  std::cout << "n=" << h.num_nodes() << " m=" << h.num_edges()
            << " avg_deg=" << fixed(s.avg_node_degree, 2)
            << " avg_edge=" << fixed(s.avg_edge_size, 2) << " features=" << fm.values.cols()
            << " classes=" << corpus.class_names.size() << '\n';
  return 0;
}

// --- train / train-edges ---------------------------------------------------

struct TrainArgs {
  fs::path data, out = "metrics.csv", summary, checkpoint;
  double alpha = 0.0, beta = 0.0;
  std::size_t epochs = 200;
  double lr = 0.04;
  std::size_t hidden = 400;
  std::size_t layers = 2;
  double dropout = 0.3;
  double label_rate = 0.15;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
};

TrainConfig train_config(const TrainArgs& a, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.lr0 = a.lr;
  cfg.hidden_dim = a.hidden;
  cfg.n_layers = a.layers;
  cfg.dropout = a.dropout;
  cfg.alpha = a.alpha;
  cfg.beta = a.beta;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

int run_train(const TrainArgs& a, bool edges) {
  const Dataset ds = load_dataset(a.data);
  if (edges && ds.edge_labels.empty())
    throw Failure(a.data.string() + ": no edge_labels.csv; edge training needs edge labels");
  const std::vector<int>& labels = edges ? ds.edge_labels : ds.labels;

  std::vector<std::uint64_t> seeds;
  std::vector<RunMetrics> runs;
  std::vector<double> test_acc, train_acc;
  double seconds = 0.0;
  for (std::size_t k = 0; k < a.seeds; ++k) {
    const std::uint64_t seed = a.seed + k;
    const TrainConfig cfg = train_config(a, seed);
    const LabelSplit split = split_labeled(labels, a.label_rate, seed);
    TrainResult r = edges ? train_edge_classifier(ds.graph, ds.features, labels, split.train,
                                                  split.test, cfg)
                          : train_node_classifier(ds.graph, ds.features, labels, split.train,
                                                  split.test, cfg);
    seeds.push_back(seed);
    test_acc.push_back(r.metrics.final_test_acc);
    train_acc.push_back(r.metrics.final_train_acc);
    seconds += r.metrics.seconds;
    runs.push_back(std::move(r.metrics));
    if (!a.checkpoint.empty() && k + 1 == a.seeds) {
      save_checkpoint(a.checkpoint, r.model,
                      {{"alpha", fixed(a.alpha, 6)},
                       {"beta", fixed(a.beta, 6)},
                       {"seed", std::to_string(seed)},
                       {"task", edges ? "edge" : "node"}});
    }
  }

  {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw Failure("cannot write " + a.out.string());
    if (runs.size() == 1) {
      write_metrics_csv(out, runs.front());
    } else {
      write_metrics_csv(out, seeds, runs);
    }
  }

  const auto [mean, sd] = mean_and_std(test_acc);
  const auto [train_mean, train_sd] = mean_and_std(train_acc);
  const fs::path summary_path = a.summary.empty() ? fs::path(a.out.string() + ".summary") : a.summary;
  std::ofstream summary(summary_path);
  if (!summary) throw Failure("cannot write " + summary_path.string());
  summary << "task=" << (edges ? "edge" : "node") << '\n'
          << "alpha=" << fixed(a.alpha, 6) << '\n'
          << "beta=" << fixed(a.beta, 6) << '\n'
          << "epochs=" << a.epochs << '\n'
          << "label_rate=" << fixed(a.label_rate, 6) << '\n'
          << "seeds=" << a.seeds << '\n'
          << "first_seed=" << a.seed << '\n'
          << "test_acc_mean=" << fixed(mean, 6) << '\n'
          << "test_acc_std=" << fixed(sd, 6) << '\n'
          << "train_acc_mean=" << fixed(train_mean, 6) << '\n'
          << "seconds_total=" << fixed(seconds, 3) << '\n'
          << "seconds_per_run=" << fixed(seconds / static_cast<double>(a.seeds), 3) << '\n';
  for (std::size_t k = 0; k < seeds.size(); ++k)
    summary << "test_acc_seed_" << seeds[k] << '=' << fixed(test_acc[k], 6) << '\n';

  std::cout << "test_acc=" << fixed(100.0 * mean, 2) << " +- " << fixed(100.0 * sd, 2)
            << " over " << a.seeds << (a.seeds == 1 ? " seed" : " seeds") << " ("
            << fixed(seconds, 1) << " s)\n";
  return 0;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  TrainArgs train;
  std::string axis = "alpha";
  std::string grid;
  double fixed_value = 0.0;
  std::size_t folds = 5;
  fs::path svg;
};

int run_sweep(const SweepArgs& a) {
  const Dataset ds = load_dataset(a.train.data);
  std::vector<double> values = a.grid.empty() ? default_sweep_values() : parse_grid(a.grid);
  std::vector<std::pair<double, double>> grid;
  for (const double v : values)
    grid.emplace_back(a.axis == "alpha" ? std::pair{v, a.fixed_value} : std::pair{a.fixed_value, v});

  const TrainConfig cfg = train_config(a.train, a.train.seed);
  const LabelSplit split = split_labeled(ds.labels, a.train.label_rate, a.train.seed);
  const CvResult cv =
      cross_validate_alpha_beta(ds.graph, ds.features, ds.labels, split.train, grid, a.folds, cfg);

  std::ofstream out(a.train.out, std::ios::binary);
  if (!out) throw Failure("cannot write " + a.train.out.string());
  out << "alpha,beta,mean_acc,std_acc\n";
  std::vector<double> means, stds;
  for (const CvCell& c : cv.cells) {
    out << fixed(c.alpha, 4) << ',' << fixed(c.beta, 4) << ',' << fixed(c.mean_accuracy, 6) << ','
        << fixed(c.std_accuracy, 6) << '\n';
    means.push_back(c.mean_accuracy);
    stds.push_back(c.std_accuracy);
  }
  if (!a.svg.empty()) {
    tools::LinePlot plot;
    plot.title = "Cross-validated accuracy, " +
                 std::string(a.axis == "alpha" ? "beta" : "alpha") + " = " +
                 fixed(a.fixed_value, 2);
    plot.x_label = a.axis;
    plot.y_label = "accuracy";
    tools::write_line_svg(a.svg, plot, values, means, stds);
  }
  std::cout << "best alpha=" << fixed(cv.best_alpha, 4) << " beta=" << fixed(cv.best_beta, 4)
            << " over " << cv.cells.size() << (cv.cells.size() == 1 ? " grid value\n" : " grid values\n");
  return 0;
}

// --- verify ----------------------------------------------------------------

int run_verify(const std::string& suite, std::uint64_t seed, std::size_t instances) {
  std::vector<SuiteCheck> checks;
  auto add = [&](std::vector<SuiteCheck> more) {
    checks.insert(checks.end(), more.begin(), more.end());
  };
  if (suite == "lemmas" || suite == "all") add(verify_lemmas(seed, instances ? instances : 100));
  if (suite == "fano" || suite == "all") add(verify_fano(seed));
  if (suite == "spectral" || suite == "all") add(verify_spectral(seed, instances ? instances : 20));

  bool ok = true;
  for (const SuiteCheck& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " [" << c.instances
              << (c.instances == 1 ? " instance" : " instances") << "] " << c.detail << '\n';
    ok = ok && c.passed;
  }
  if (!ok) std::cerr << "hnhn verify: at least one check failed\n";
  return ok ? 0 : 1;
}

// --- expand ----------------------------------------------------------------

int run_expand(const fs::path& data, const fs::path& hypergraph, const std::string& kind,
               const fs::path& out_path) {
  const Hypergraph h = read_hypergraph(hypergraph.empty() ? data / "hypergraph.txt" : hypergraph);
  const DenseMatrix m = kind == "clique" ? clique_adjacency(h)
                        : kind == "star" ? star_adjacency(h)
                                         : incidence_matrix(h);
  if (out_path.empty()) {
    write_matrix_csv(std::cout, m);
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) throw Failure("cannot write " + out_path.string());
  write_matrix_csv(out, m);
  std::cout << kind << ' ' << m.rows() << 'x' << m.cols() << " -> " << out_path.string() << '\n';
  return 0;
}

// --- gradcheck -------------------------------------------------------------

int run_gradcheck(const std::string& size, std::uint64_t seed) {
  GradCheckOptions o = size == "medium" ? GradCheckOptions::medium() : GradCheckOptions::small();
  o.seed = seed;
  const GradCheckReport r = gradient_check(o);
  char buf[160];
  for (const ParameterCheck& p : r.parameters) {
    std::snprintf(buf, sizeof buf, "%-18s %6zu entries  max_rel_err=%.3e\n", p.name.c_str(),
                  p.entries, p.max_relative_error);
    std::cout << buf;
  }
  std::snprintf(buf, sizeof buf, "max relative error %.3e (tolerance %.0e): %s\n",
                r.max_relative_error, kGradCheckTolerance, r.passed ? "PASS" : "FAIL");
  std::cout << buf;
  if (!r.passed) std::cerr << "hnhn gradcheck: gradient mismatch above tolerance\n";
  return r.passed ? 0 : 1;
}

// --- bench -----------------------------------------------------------------

int run_bench(bool sweep, const ScalingOptions& base) {
  ScalingOptions o = base;
  if (!sweep) o.factors = {1};
  const ScalingReport r = measure_scaling(o);
  std::cout << "nodes,edges,incidences,seconds\n";
  for (const ScalingPoint& p : r.points)
    std::cout << p.nodes << ',' << p.edges << ',' << p.incidences << ',' << fixed(p.seconds, 6)
              << '\n';
  if (sweep) {
    std::cout << "exponent=" << fixed(r.exponent, 3) << '\n';
    if (r.exponent > 1.5)
      std::cerr << "hnhn bench: warning: fitted exponent " << fixed(r.exponent, 3)
                << " exceeds 1.5 in the incidence count\n";
  }
  return 0;
}

CLI::Option* seed_option(CLI::App* sub, std::uint64_t& seed) {
  return sub->add_option("--seed", seed, "Random seed (falls back to $HNHN_SEED)")
      ->envname("HNHN_SEED")
      ->capture_default_str();
}

void add_train_options(CLI::App* sub, TrainArgs& a) {
  sub->add_option("--data", a.data, "Prepared dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  sub->add_option("--alpha", a.alpha, "Edge-size exponent")->capture_default_str();
  sub->add_option("--beta", a.beta, "Node-degree exponent")->capture_default_str();
  sub->add_option("--epochs", a.epochs, "Training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--lr", a.lr, "Initial learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--hidden", a.hidden, "Hidden dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--layers", a.layers, "HNHN layers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--dropout", a.dropout, "Dropout rate")
      ->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();
  sub->add_option("--label-rate", a.label_rate, "Fraction of rows used for training")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9))
      ->capture_default_str();
  seed_option(sub, a.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HNHN hypergraph toolkit"};
  app.name("hnhn");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a dataset directory from raw TSV files");
  ingest_cmd->add_option("--docs", ingest.docs, "docs.tsv")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--relations", ingest.relations, "relations.tsv")
      ->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--labels", ingest.labels, "labels.tsv")
      ->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--mode", ingest.mode, "Hyperedge construction")
      ->check(CLI::IsMember({"coauthor", "cocite"}))
      ->capture_default_str();
  ingest_cmd->add_option("--features", ingest.features, "Feature weighting")
      ->check(CLI::IsMember({"tfidf", "bow"}))
      ->capture_default_str();
  ingest_cmd->add_option("--vocab", ingest.vocab, "Vocabulary size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ingest_cmd->add_option("--max-df", ingest.max_df, "Drop terms above this document frequency")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  ingest_cmd->add_option("--ngram", ingest.ngram, "Longest n-gram")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train node classification");
  auto* edges_cmd = app.add_subcommand("train-edges", "Train hyperedge classification");
  for (auto* sub : {train_cmd, edges_cmd}) {
    add_train_options(sub, train);
    sub->add_option("--seeds", train.seeds, "Number of consecutive seeds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--out", train.out, "Per-epoch metrics CSV")->capture_default_str();
    sub->add_option("--summary", train.summary, "Summary file (default: <out>.summary)");
    sub->add_option("--checkpoint", train.checkpoint, "Checkpoint stem for the last model");
  }

  SweepArgs sweep;
  sweep.train.out = "sweep.csv";
  auto* sweep_cmd = app.add_subcommand("sweep", "Cross-validated alpha or beta sweep");
  add_train_options(sweep_cmd, sweep.train);
  sweep_cmd->add_option("--axis", sweep.axis, "Swept parameter")
      ->check(CLI::IsMember({"alpha", "beta"}))
      ->capture_default_str();
  sweep_cmd->add_option("--grid", sweep.grid, "Comma-separated values (default -1:0.25:1)")
      ->check(kGridList);
  sweep_cmd->add_option("--fixed", sweep.fixed_value, "Value of the other parameter")
      ->capture_default_str();
  sweep_cmd->add_option("--folds", sweep.folds, "Cross-validation folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep.train.out, "Sweep CSV")->capture_default_str();
  sweep_cmd->add_option("--svg", sweep.svg, "Optional SVG line plot");

  std::string suite = "all";
  std::uint64_t verify_seed = 0;
  std::size_t instances = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run structural checks");
  verify_cmd->add_option("--suite", suite, "Which checks")
      ->check(CLI::IsMember({"lemmas", "fano", "spectral", "all"}))
      ->capture_default_str();
  verify_cmd->add_option("--instances", instances,
                         "Random instances per suite (default 100 lemmas, 20 spectral)");
  seed_option(verify_cmd, verify_seed);

  fs::path expand_data, expand_graph, expand_out;
  std::string kind = "clique";
  auto* expand_cmd = app.add_subcommand("expand", "Write a dense expansion matrix as CSV");
  auto* data_opt = expand_cmd->add_option("--data", expand_data, "Dataset directory")
                       ->check(CLI::ExistingDirectory);
  auto* graph_opt = expand_cmd->add_option("--hypergraph", expand_graph, "Hypergraph text file")
                        ->check(CLI::ExistingFile);
  data_opt->excludes(graph_opt);
  expand_cmd->add_option("--kind", kind, "Matrix to build")
      ->check(CLI::IsMember({"clique", "star", "incidence"}))
      ->capture_default_str();
  expand_cmd->add_option("--out", expand_out, "Output CSV (default: standard output)");

  std::string size = "small";
  std::uint64_t grad_seed = 0;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  grad_cmd->add_option("--size", size, "Fixture size")
      ->check(CLI::IsMember({"small", "medium"}))
      ->capture_default_str();
  seed_option(grad_cmd, grad_seed);

  bool scale_sweep = false;
  ScalingOptions scaling;
  auto* bench_cmd = app.add_subcommand("bench", "Time forward and backward passes");
  bench_cmd->add_flag("--scale-sweep", scale_sweep, "Time 1x, 2x and 4x sizes and fit an exponent");
  bench_cmd->add_option("--base-nodes", scaling.base_nodes, "Nodes at 1x")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--hidden", scaling.hidden_dim, "Hidden dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--reps", scaling.repetitions, "Timed repetitions per size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  seed_option(bench_cmd, scaling.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*train_cmd) return run_train(train, false);
    if (*edges_cmd) return run_train(train, true);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*verify_cmd) return run_verify(suite, verify_seed, instances);
    if (*expand_cmd) {
      if (expand_data.empty() && expand_graph.empty())
        throw CLI::RequiredError("--data or --hypergraph");
      return run_expand(expand_data, expand_graph, kind, expand_out);
    }
    if (*grad_cmd) return run_gradcheck(size, grad_seed);
    if (*bench_cmd) return run_bench(scale_sweep, scaling);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "hnhn: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
