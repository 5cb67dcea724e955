#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hnhn/hypergraph.hpp"
#include "hnhn/matrix.hpp"

namespace hnhn {

/// Raw documents plus the relation lists that become hyperedges.
///
/// On-disk layout (tab separated, UTF-8):
///   docs.tsv       doc id <TAB> text
///   relations.tsv  relation id <TAB> space-separated doc ids
///   labels.tsv     doc id <TAB> class name
struct Corpus {
  std::vector<std::string> doc_ids;
  std::vector<std::string> texts;
  std::vector<std::string> relation_ids;
  /// Document indices (positions in doc_ids) per relation, duplicates removed.
  std::vector<std::vector<std::size_t>> relations;
  /// Class id per document, -1 when unlabeled. Ids are dense from 0 and
  /// assigned in order of first appearance in labels.tsv.
  std::vector<int> labels;
  std::vector<std::string> class_names;
};

/// Throws std::runtime_error on unreadable files, malformed lines, or ids
/// that do not name a document.
Corpus read_corpus(const std::filesystem::path& docs, const std::filesystem::path& relations,
                   const std::filesystem::path& labels);

struct IngestedHypergraph {
  Hypergraph graph;
  /// New node id -> document index.
  std::vector<std::size_t> node_doc;
  /// New edge id -> relation index.
  std::vector<std::size_t> edge_relation;
};

/// One node per document, one hyperedge per author (relation), then both
/// pruning rules. Throws std::runtime_error if nothing survives pruning.
IngestedHypergraph build_coauthorship_hypergraph(const Corpus& corpus);
/// One node per document, one hyperedge per citing paper joining the papers
/// it cites, then both pruning rules.
IngestedHypergraph build_cocitation_hypergraph(const Corpus& corpus);

/// Labels for cocitation hyperedges: each edge is named after its citing
/// paper and takes that paper's class, or -1 when the paper is unlabeled or
/// not in the corpus.
std::vector<int> cocitation_edge_labels(const Corpus& corpus, const IngestedHypergraph& ingested);

enum class FeatureMode { tfidf, bow };

struct FeatureOptions {
  std::size_t vocab_size = 1000;
  /// Terms in more than this fraction of documents are dropped before the
  /// vocabulary is truncated.
  double max_doc_freq = 0.2;
  /// Longest n-gram (1 = unigrams only, 2 = unigrams and bigrams).
  std::size_t max_ngram = 2;
  FeatureMode mode = FeatureMode::tfidf;
};

struct FeatureMatrix {
  Matrix values;                       // documents x vocabulary
  std::vector<std::string> vocabulary;  // column order
};

/// Lowercases and splits on non-alphanumeric ASCII characters.
std::vector<std::string> tokenize(const std::string& text);

/// Vocabulary: n-grams ranked by total corpus count (ties lexicographic)
/// after the document-frequency filter. Values: count * ln(n_docs / (1 + df))
/// for tfidf, raw counts for bow; each row then L2-normalized (empty rows
/// stay zero). Throws std::invalid_argument on an empty corpus or vocabulary.
FeatureMatrix tfidf_features(std::span<const std::string> documents, const FeatureOptions& options);

struct LabelSplit {
  std::vector<Id> train;
  std::vector<Id> test;
};

/// Stratified seeded split of the labeled rows (label >= 0). The train set
/// has ceil(rate * labels.size()) rows, apportioned to classes by largest
/// remainder; the remaining labeled rows form the test set. Throws
/// std::invalid_argument for rate outside (0, 1), and std::runtime_error
/// when a class receives no training rows or no test rows remain.
LabelSplit split_labeled(std::span<const int> labels, double rate, std::uint64_t seed);

// Prepared-dataset files (see the README for the directory layout).
void write_features(const std::filesystem::path& path, const Matrix& features);
Matrix read_features(const std::filesystem::path& path);
/// `labels.csv`: header `node,label`, one line per labeled row.
void write_labels(const std::filesystem::path& path, std::span<const int> labels,
                  const char* id_column = "node");
/// Returns one entry per row (-1 where the file has none) for `rows` rows.
std::vector<int> load_labels(const std::filesystem::path& path, std::size_t rows);
void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);

/// A prepared dataset directory: `hypergraph.txt`, `features.bin`,
/// `labels.csv` and, when present, `edge_labels.csv`.
struct Dataset {
  Hypergraph graph;
  Matrix features;
  std::vector<int> labels;       // per node, -1 when unlabeled
  std::vector<int> edge_labels;  // per edge; empty when the file is absent
};

/// Writes the files above (edge labels only when `edge_labels` is nonempty).
void save_dataset(const std::filesystem::path& dir, const Hypergraph& graph,
                  const Matrix& features, std::span<const int> labels,
                  std::span<const int> edge_labels = {});
/// Throws std::runtime_error on missing files or when the feature row count
/// differs from the node count.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace hnhn
