#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hnhn/hypergraph.hpp"
#include "hnhn/matrix.hpp"
#include "hnhn/rng.hpp"

namespace hnhn {

/// Random hypergraph with `m` edges whose sizes are uniform in
/// [1, min(max_edge_size, n)]; members are distinct uniform nodes.
Hypergraph random_hypergraph(std::size_t n, std::size_t m, std::size_t max_edge_size, Rng& rng);

struct PlantedConfig {
  std::size_t nodes = 200;
  std::size_t communities = 2;
  std::size_t edges = 60;
  std::size_t min_edge_size = 4;
  std::size_t max_edge_size = 10;
  std::uint64_t seed = 0;
};

struct PlantedDataset {
  Hypergraph graph;
  std::vector<int> labels;  // community of each node
  Matrix features;          // one-hot node identity
};

/// Nodes are split evenly into communities and every hyperedge is drawn
/// inside one community. Each node is first placed in one edge of its
/// community, so no node is isolated; edges are then topped up with random
/// community members to a size drawn from [min_edge_size, max_edge_size].
PlantedDataset planted_communities(const PlantedConfig& config);

}  // namespace hnhn
