#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace hnhn {

using Id = std::uint32_t;

/// Compressed list-of-lists (CSR layout). Row k is the sorted list of ids
/// adjacent to entity k.
class AdjacencyList {
 public:
  AdjacencyList() : offsets_{0} {}
  explicit AdjacencyList(const std::vector<std::vector<Id>>& lists);

  std::size_t size() const { return offsets_.size() - 1; }
  std::size_t total() const { return ids_.size(); }
  std::size_t degree(std::size_t k) const { return offsets_[k + 1] - offsets_[k]; }

  std::span<const Id> operator[](std::size_t k) const {
    return {ids_.data() + offsets_[k], degree(k)};
  }

  std::vector<std::vector<Id>> to_lists() const;

  friend bool operator==(const AdjacencyList&, const AdjacencyList&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Id> ids_;
};

/// Incidence structure stored as dual adjacency lists. The incidence matrix
/// is never materialized. Immutable after construction.
class Hypergraph {
 public:
  Hypergraph() = default;

  /// Throws std::invalid_argument on out-of-range ids, empty edges or a
  /// node repeated within one edge. Edge order is preserved.
  static Hypergraph from_edges(const std::vector<std::vector<Id>>& edges, std::size_t n);

  std::size_t num_nodes() const { return node_to_edges_.size(); }
  std::size_t num_edges() const { return edge_to_nodes_.size(); }
  std::size_t num_incidences() const { return edge_to_nodes_.total(); }

  const AdjacencyList& node_to_edges() const { return node_to_edges_; }
  const AdjacencyList& edge_to_nodes() const { return edge_to_nodes_; }

  std::size_t node_degree(std::size_t i) const { return node_to_edges_.degree(i); }
  std::size_t edge_size(std::size_t j) const { return edge_to_nodes_.degree(j); }

  std::vector<std::vector<Id>> edges() const { return edge_to_nodes_.to_lists(); }

  /// Full scan of the dual-consistency and range invariants.
  bool is_consistent() const;

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  AdjacencyList node_to_edges_;
  AdjacencyList edge_to_nodes_;
};

inline Hypergraph build_hypergraph(const std::vector<std::vector<Id>>& edges, std::size_t n) {
  return Hypergraph::from_edges(edges, n);
}

inline constexpr std::int64_t kRemoved = -1;

struct PruneResult {
  Hypergraph graph;
  /// old node id -> new node id, or kRemoved.
  std::vector<std::int64_t> node_map;
  /// old edge id -> new edge id, or kRemoved.
  std::vector<std::int64_t> edge_map;
};

/// Removes degree-0 nodes and/or size-1 edges, repeating until neither rule
/// applies. Surviving ids are renumbered densely in their original order.
PruneResult prune(const Hypergraph& h, bool drop_dangling_nodes, bool drop_singleton_edges);

/// Degree-power tables for the normalized aggregations.
///
/// Node -> edge messages use node_scale_beta as per-source weight and
/// edge_divisor_beta as per-target divisor; edge -> node messages use
/// edge_scale_alpha and node_divisor_alpha. A divisor that would be 0 (an
/// isolated node or an empty target) is stored as 1 so the aggregate is a
/// zero vector; the scale of a degree-0 entity is stored as 0 and never read.
struct NormalizationTables {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> edge_scale_alpha;    // |N_j|^alpha
  std::vector<double> node_divisor_alpha;  // sum over j in N_i of |N_j|^alpha
  std::vector<double> node_scale_beta;     // |N_i|^beta
  std::vector<double> edge_divisor_beta;   // sum over i in N_j of |N_i|^beta

  /// All scales and divisors 1: aggregation becomes the plain incidence
  /// product (A or Aᵀ) without normalization.
  static NormalizationTables unit(const Hypergraph& h);
};

/// Throws std::invalid_argument for non-finite alpha or beta.
NormalizationTables normalization_tables(const Hypergraph& h, double alpha, double beta);

struct DegreeStats {
  double avg_node_degree = 0.0;
  double avg_edge_size = 0.0;
  double std_node_degree = 0.0;  // population standard deviation
  double std_edge_size = 0.0;
};

/// Throws std::invalid_argument if the hypergraph has no nodes or no edges.
DegreeStats degree_stats(const Hypergraph& h);

// Text format: header `n m`, then one line per edge holding its 0-based node
// ids separated by spaces. `#` starts a comment; blank lines are ignored.
Hypergraph read_hypergraph(std::istream& in);
Hypergraph read_hypergraph(const std::filesystem::path& path);
void write_hypergraph(std::ostream& out, const Hypergraph& h);
void write_hypergraph(const std::filesystem::path& path, const Hypergraph& h);

}  // namespace hnhn
