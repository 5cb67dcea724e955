#include "hnhn/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace hnhn {

AdjacencyList::AdjacencyList(const std::vector<std::vector<Id>>& lists) {
  offsets_.reserve(lists.size() + 1);
  offsets_.push_back(0);
  std::size_t total = 0;
  for (const auto& l : lists) total += l.size();
  ids_.reserve(total);
  for (const auto& l : lists) {
    ids_.insert(ids_.end(), l.begin(), l.end());
    offsets_.push_back(ids_.size());
  }
}

std::vector<std::vector<Id>> AdjacencyList::to_lists() const {
  std::vector<std::vector<Id>> out(size());
  for (std::size_t k = 0; k < size(); ++k) {
    const auto row = (*this)[k];
    out[k].assign(row.begin(), row.end());
  }
  return out;
}

Hypergraph Hypergraph::from_edges(const std::vector<std::vector<Id>>& edges, std::size_t n) {
  std::vector<std::vector<Id>> edge_lists;
  edge_lists.reserve(edges.size());
  std::vector<std::vector<Id>> node_lists(n);
  for (std::size_t j = 0; j < edges.size(); ++j) {
    if (edges[j].empty()) {
      throw std::invalid_argument("hyperedge " + std::to_string(j) + " is empty");
    }
    std::vector<Id> members = edges[j];
    std::sort(members.begin(), members.end());
    if (members.back() >= n) {
      throw std::invalid_argument("hyperedge " + std::to_string(j) + " references node " +
                                  std::to_string(members.back()) + " but n = " +
                                  std::to_string(n));
    }
    if (auto dup = std::adjacent_find(members.begin(), members.end()); dup != members.end()) {
      throw std::invalid_argument("hyperedge " + std::to_string(j) + " lists node " +
                                  std::to_string(*dup) + " more than once");
    }
    // Edges are visited in ascending order, so each node list stays sorted.
    for (Id i : members) node_lists[i].push_back(static_cast<Id>(j));
    edge_lists.push_back(std::move(members));
  }
  Hypergraph h;
  h.node_to_edges_ = AdjacencyList(node_lists);
  h.edge_to_nodes_ = AdjacencyList(edge_lists);
  return h;
}

bool Hypergraph::is_consistent() const {
  const std::size_t n = num_nodes();
  const std::size_t m = num_edges();
  auto sorted_unique = [](std::span<const Id> s) {
    return std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end();
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto es = node_to_edges_[i];
    if (!sorted_unique(es)) return false;
    for (Id j : es) {
      if (j >= m) return false;
      const auto ns = edge_to_nodes_[j];
      if (!std::binary_search(ns.begin(), ns.end(), static_cast<Id>(i))) return false;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto ns = edge_to_nodes_[j];
    if (!sorted_unique(ns)) return false;
    for (Id i : ns) {
      if (i >= n) return false;
      const auto es = node_to_edges_[i];
      if (!std::binary_search(es.begin(), es.end(), static_cast<Id>(j))) return false;
    }
  }
  return node_to_edges_.total() == edge_to_nodes_.total();
}

PruneResult prune(const Hypergraph& h, bool drop_dangling_nodes, bool drop_singleton_edges) {
  const std::size_t n = h.num_nodes();
  const std::size_t m = h.num_edges();
  std::vector<bool> node_alive(n, true);
  std::vector<bool> edge_alive(m, true);
  std::vector<std::size_t> degree(n);
  for (std::size_t i = 0; i < n; ++i) degree[i] = h.node_degree(i);

  // Edges never lose members (only dangling nodes are removed), so only
  // node degrees change as singleton edges disappear.
  bool changed = true;
  while (changed) {
    changed = false;
    if (drop_singleton_edges) {
      for (std::size_t j = 0; j < m; ++j) {
        if (edge_alive[j] && h.edge_size(j) == 1) {
          edge_alive[j] = false;
          for (Id i : h.edge_to_nodes()[j]) --degree[i];
          changed = true;
        }
      }
    }
    if (drop_dangling_nodes) {
      for (std::size_t i = 0; i < n; ++i) {
        if (node_alive[i] && degree[i] == 0) {
          node_alive[i] = false;
          changed = true;
        }
      }
    }
  }

  PruneResult result;
  result.node_map.assign(n, kRemoved);
  result.edge_map.assign(m, kRemoved);
  std::int64_t next = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (node_alive[i]) result.node_map[i] = next++;
  const auto new_n = static_cast<std::size_t>(next);

  std::vector<std::vector<Id>> edges;
  for (std::size_t j = 0; j < m; ++j) {
    if (!edge_alive[j]) continue;
    result.edge_map[j] = static_cast<std::int64_t>(edges.size());
    std::vector<Id> members;
    for (Id i : h.edge_to_nodes()[j]) members.push_back(static_cast<Id>(result.node_map[i]));
    edges.push_back(std::move(members));
  }
  result.graph = Hypergraph::from_edges(edges, new_n);
  return result;
}

NormalizationTables NormalizationTables::unit(const Hypergraph& h) {
  NormalizationTables t;
  t.edge_scale_alpha.assign(h.num_edges(), 1.0);
  t.node_divisor_alpha.assign(h.num_nodes(), 1.0);
  t.node_scale_beta.assign(h.num_nodes(), 1.0);
  t.edge_divisor_beta.assign(h.num_edges(), 1.0);
  return t;
}

namespace {

// Degree-0 entities never act as message sources, so their scale is unused.
double degree_power(std::size_t degree, double exponent) {
  return degree == 0 ? 0.0 : std::pow(static_cast<double>(degree), exponent);
}

}  // namespace

NormalizationTables normalization_tables(const Hypergraph& h, double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("normalization exponents must be finite");
  }
  const std::size_t n = h.num_nodes();
  const std::size_t m = h.num_edges();
  NormalizationTables t;
  t.alpha = alpha;
  t.beta = beta;
  t.edge_scale_alpha.resize(m);
  t.edge_divisor_beta.resize(m);
  t.node_scale_beta.resize(n);
  t.node_divisor_alpha.resize(n);
  for (std::size_t j = 0; j < m; ++j) t.edge_scale_alpha[j] = degree_power(h.edge_size(j), alpha);
  for (std::size_t i = 0; i < n; ++i) t.node_scale_beta[i] = degree_power(h.node_degree(i), beta);

  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Id j : h.node_to_edges()[i]) sum += t.edge_scale_alpha[j];
    t.node_divisor_alpha[i] = sum > 0.0 ? sum : 1.0;
  }
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (Id i : h.edge_to_nodes()[j]) sum += t.node_scale_beta[i];
    t.edge_divisor_beta[j] = sum > 0.0 ? sum : 1.0;
  }
  return t;
}

DegreeStats degree_stats(const Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  const std::size_t m = h.num_edges();
  if (n == 0 || m == 0) throw std::invalid_argument("degree_stats: empty hypergraph");

  auto mean_std = [](std::size_t count, auto&& value) {
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) sum += value(k);
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double d = value(k) - mean;
      sq += d * d;
    }
    return std::pair{mean, std::sqrt(sq / static_cast<double>(count))};
  };
  DegreeStats s;
  std::tie(s.avg_node_degree, s.std_node_degree) =
      mean_std(n, [&](std::size_t i) { return static_cast<double>(h.node_degree(i)); });
  std::tie(s.avg_edge_size, s.std_edge_size) =
      mean_std(m, [&](std::size_t j) { return static_cast<double>(h.edge_size(j)); });
  return s;
}

namespace {

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("hypergraph text line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Hypergraph read_hypergraph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_content_line(in, line, line_no)) parse_error(line_no, "missing `n m` header");
  std::istringstream header(line);
  long long n = -1;
  long long m = -1;
  std::string extra;
  if (!(header >> n >> m) || n < 0 || m < 0 || (header >> extra)) {
    parse_error(line_no, "malformed header, expected `n m`");
  }
  std::vector<std::vector<Id>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  while (static_cast<long long>(edges.size()) < m) {
    if (!next_content_line(in, line, line_no)) {
      parse_error(line_no, "expected " + std::to_string(m) + " edge lines, found " +
                               std::to_string(edges.size()));
    }
    std::istringstream row(line);
    std::vector<Id> members;
    long long id = 0;
    while (row >> id) {
      if (id < 0) parse_error(line_no, "negative node id");
      members.push_back(static_cast<Id>(id));
    }
    if (!row.eof()) parse_error(line_no, "non-integer token");
    edges.push_back(std::move(members));
  }
  if (next_content_line(in, line, line_no)) parse_error(line_no, "unexpected trailing content");
  try {
    return Hypergraph::from_edges(edges, static_cast<std::size_t>(n));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("hypergraph text: ") + e.what());
  }
}

Hypergraph read_hypergraph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_hypergraph(in);
}

void write_hypergraph(std::ostream& out, const Hypergraph& h) {
  out << h.num_nodes() << ' ' << h.num_edges() << '\n';
  for (std::size_t j = 0; j < h.num_edges(); ++j) {
    const auto members = h.edge_to_nodes()[j];
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k) out << ' ';
      out << members[k];
    }
    out << '\n';
  }
}

void write_hypergraph(const std::filesystem::path& path, const Hypergraph& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_hypergraph(out, h);
}

}  // namespace hnhn
