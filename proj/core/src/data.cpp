#include "hnhn/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "hnhn/autodiff.hpp"
#include "hnhn/rng.hpp"

namespace hnhn {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

struct TsvRow {
  std::string key;
  std::string value;
};

std::vector<TsvRow> read_tsv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<TsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected `id<TAB>value`");
    }
    rows.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return rows;
}

}  // namespace

Corpus read_corpus(const std::filesystem::path& docs, const std::filesystem::path& relations,
                   const std::filesystem::path& labels) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> index;
  for (auto& row : read_tsv(docs)) {
    if (!index.emplace(row.key, corpus.doc_ids.size()).second) {
      throw std::runtime_error(docs.string() + ": duplicate document id " + row.key);
    }
    corpus.doc_ids.push_back(std::move(row.key));
    corpus.texts.push_back(std::move(row.value));
  }
  auto doc_index = [&](const std::string& id, const std::filesystem::path& file) {
    auto it = index.find(id);
    if (it == index.end()) throw std::runtime_error(file.string() + ": unknown document " + id);
    return it->second;
  };

  for (auto& row : read_tsv(relations)) {
    std::istringstream members(row.value);
    std::vector<std::size_t> docs_in_relation;
    std::string id;
    while (members >> id) docs_in_relation.push_back(doc_index(id, relations));
    std::sort(docs_in_relation.begin(), docs_in_relation.end());
    docs_in_relation.erase(std::unique(docs_in_relation.begin(), docs_in_relation.end()),
                           docs_in_relation.end());
    corpus.relation_ids.push_back(std::move(row.key));
    corpus.relations.push_back(std::move(docs_in_relation));
  }

  corpus.labels.assign(corpus.doc_ids.size(), -1);
  std::map<std::string, int> class_ids;
  for (const auto& row : read_tsv(labels)) {
    const std::size_t doc = doc_index(row.key, labels);
    auto [it, inserted] = class_ids.emplace(row.value, static_cast<int>(corpus.class_names.size()));
    if (inserted) corpus.class_names.push_back(row.value);
    corpus.labels[doc] = it->second;
  }
  return corpus;
}

namespace {

IngestedHypergraph build_from_relations(const Corpus& corpus) {
  std::vector<std::vector<Id>> edges;
  std::vector<std::size_t> edge_relation;
  for (std::size_t r = 0; r < corpus.relations.size(); ++r) {
    if (corpus.relations[r].empty()) continue;
    std::vector<Id> members;
    for (std::size_t doc : corpus.relations[r]) members.push_back(static_cast<Id>(doc));
    edges.push_back(std::move(members));
    edge_relation.push_back(r);
  }
  const Hypergraph raw = Hypergraph::from_edges(edges, corpus.doc_ids.size());
  PruneResult pruned = prune(raw, true, true);
  if (pruned.graph.num_nodes() == 0 || pruned.graph.num_edges() == 0) {
    throw std::runtime_error("ingest: hypergraph is empty after pruning");
  }
  IngestedHypergraph out;
  out.node_doc.resize(pruned.graph.num_nodes());
  for (std::size_t doc = 0; doc < pruned.node_map.size(); ++doc) {
    if (pruned.node_map[doc] != kRemoved) out.node_doc[pruned.node_map[doc]] = doc;
  }
  out.edge_relation.resize(pruned.graph.num_edges());
  for (std::size_t e = 0; e < pruned.edge_map.size(); ++e) {
    if (pruned.edge_map[e] != kRemoved) out.edge_relation[pruned.edge_map[e]] = edge_relation[e];
  }
  out.graph = std::move(pruned.graph);
  return out;
}

}  // namespace

IngestedHypergraph build_coauthorship_hypergraph(const Corpus& corpus) {
  return build_from_relations(corpus);
}

// Structurally identical to co-authorship: the relation id names the citing
// paper and its members are the cited papers.
IngestedHypergraph build_cocitation_hypergraph(const Corpus& corpus) {
  return build_from_relations(corpus);
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    if (ch < 0x80 && std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t max_n) {
  std::vector<std::string> out;
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < n; ++k) gram += ' ' + tokens[i + k];
      out.push_back(std::move(gram));
    }
  }
  return out;
}

}  // namespace

FeatureMatrix tfidf_features(std::span<const std::string> documents,
                             const FeatureOptions& options) {
  if (documents.empty()) throw std::invalid_argument("tfidf: empty corpus");
  if (options.max_ngram < 1) throw std::invalid_argument("tfidf: max_ngram must be at least 1");
  const std::size_t n_docs = documents.size();

  std::vector<std::map<std::string, std::size_t>> doc_counts(n_docs);
  std::map<std::string, std::size_t> corpus_count;
  std::map<std::string, std::size_t> doc_freq;
  for (std::size_t d = 0; d < n_docs; ++d) {
    for (auto& gram : ngrams(tokenize(documents[d]), options.max_ngram)) ++doc_counts[d][gram];
    for (const auto& [gram, count] : doc_counts[d]) {
      corpus_count[gram] += count;
      ++doc_freq[gram];
    }
  }

  std::vector<std::pair<std::string, std::size_t>> candidates;
  for (const auto& [gram, count] : corpus_count) {
    const double df_fraction =
        static_cast<double>(doc_freq[gram]) / static_cast<double>(n_docs);
    if (df_fraction <= options.max_doc_freq) candidates.emplace_back(gram, count);
  }
  // Stable sort of a lexicographically ordered list keeps ties lexicographic.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (candidates.size() > options.vocab_size) candidates.resize(options.vocab_size);
  if (candidates.empty()) throw std::invalid_argument("tfidf: vocabulary is empty after filtering");

  FeatureMatrix out;
  std::map<std::string, std::size_t> column;
  for (const auto& [gram, count] : candidates) {
    column.emplace(gram, out.vocabulary.size());
    out.vocabulary.push_back(gram);
  }
  out.values = Matrix(n_docs, out.vocabulary.size());
  for (std::size_t d = 0; d < n_docs; ++d) {
    auto row = out.values.row(d);
    for (const auto& [gram, count] : doc_counts[d]) {
      auto it = column.find(gram);
      if (it == column.end()) continue;
      double value = static_cast<double>(count);
      if (options.mode == FeatureMode::tfidf) {
        value *= std::log(static_cast<double>(n_docs) /
                          (1.0 + static_cast<double>(doc_freq[gram])));
      }
      row[it->second] = value;
    }
    double norm = 0.0;
    for (double v : row) norm += v * v;
    if (norm > 0.0) {
      const double inv = 1.0 / std::sqrt(norm);
      for (double& v : row) v *= inv;
    }
  }
  return out;
}

LabelSplit split_labeled(std::span<const int> labels, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("label rate must be in (0, 1)");
  std::map<int, std::vector<Id>> by_class;
  std::size_t labeled = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= 0) {
      by_class[labels[r]].push_back(static_cast<Id>(r));
      ++labeled;
    }
  }
  if (labeled == 0) throw std::runtime_error("split: no labeled rows");
  const auto wanted = static_cast<std::size_t>(
      std::ceil(rate * static_cast<double>(labels.size()) - 1e-9));
  const std::size_t total = std::min(wanted, labeled);

  // Largest-remainder apportionment of `total` over classes.
  std::vector<std::size_t> quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  std::size_t k = 0;
  for (const auto& [cls, rows] : by_class) {
    const double exact =
        static_cast<double>(total) * static_cast<double>(rows.size()) / static_cast<double>(labeled);
    quota.push_back(static_cast<std::size_t>(std::floor(exact)));
    assigned += quota.back();
    remainders.emplace_back(exact - std::floor(exact), k++);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++quota[remainders[i].second];

  Rng rng(seed);
  LabelSplit split;
  k = 0;
  for (auto& [cls, rows] : by_class) {
    if (quota[k] == 0) {
      throw std::runtime_error("split: class " + std::to_string(cls) +
                               " receives no training rows at this label rate");
    }
    shuffle(rows, rng);
    split.train.insert(split.train.end(), rows.begin(), rows.begin() + quota[k]);
    split.test.insert(split.test.end(), rows.begin() + quota[k], rows.end());
    ++k;
  }
  if (split.test.empty()) throw std::runtime_error("split: no labeled rows left for testing");
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<int> cocitation_edge_labels(const Corpus& corpus, const IngestedHypergraph& ingested) {
  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t d = 0; d < corpus.doc_ids.size(); ++d) doc_index.emplace(corpus.doc_ids[d], d);
  std::vector<int> labels(ingested.edge_relation.size(), -1);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto it = doc_index.find(corpus.relation_ids[ingested.edge_relation[j]]);
    if (it != doc_index.end()) labels[j] = corpus.labels[it->second];
  }
  return labels;
}

void write_features(const std::filesystem::path& path, const Matrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix_binary(out, features);
}

Matrix read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_matrix_binary(in);
}

void write_labels(const std::filesystem::path& path, std::span<const int> labels,
                  const char* id_column) {
  std::ofstream out = open_out(path);
  out << id_column << ",label\n";
  for (std::size_t r = 0; r < labels.size(); ++r)
    if (labels[r] >= 0) out << r << ',' << labels[r] << '\n';
}

std::vector<int> load_labels(const std::filesystem::path& path, std::size_t rows) {
  std::ifstream in = open_in(path);
  std::vector<int> labels(rows, -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    const auto comma = line.find(',');
    std::size_t row = 0;
    int label = -1;
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      row = std::stoul(line.substr(0, comma));
      label = std::stoi(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected `row,label`");
    }
    if (row >= rows || label < 0) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": row or label out of range");
    }
    labels[row] = label;
  }
  return labels;
}

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  std::ofstream out = open_out(path);
  for (const auto& l : lines) out << l << '\n';
}

void save_dataset(const std::filesystem::path& dir, const Hypergraph& graph,
                  const Matrix& features, std::span<const int> labels,
                  std::span<const int> edge_labels) {
  std::filesystem::create_directories(dir);
  write_hypergraph(dir / "hypergraph.txt", graph);
  write_features(dir / "features.bin", features);
  write_labels(dir / "labels.csv", labels, "node");
  if (!edge_labels.empty()) write_labels(dir / "edge_labels.csv", edge_labels, "edge");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.graph = read_hypergraph(dir / "hypergraph.txt");
  d.features = read_features(dir / "features.bin");
  if (d.features.rows() != d.graph.num_nodes()) {
    throw std::runtime_error(dir.string() + ": features.bin has " +
                             std::to_string(d.features.rows()) + " rows for " +
                             std::to_string(d.graph.num_nodes()) + " nodes");
  }
  d.labels = load_labels(dir / "labels.csv", d.graph.num_nodes());
  if (std::filesystem::exists(dir / "edge_labels.csv"))
    d.edge_labels = load_labels(dir / "edge_labels.csv", d.graph.num_edges());
  return d;
}

}  // namespace hnhn
