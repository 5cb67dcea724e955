#include "hnhn/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hnhn {

Hypergraph random_hypergraph(std::size_t n, std::size_t m, std::size_t max_edge_size, Rng& rng) {
  if (n == 0 || max_edge_size == 0) throw std::invalid_argument("random_hypergraph: empty");
  const std::size_t cap = std::min(max_edge_size, n);
  std::vector<Id> pool(n);
  std::iota(pool.begin(), pool.end(), Id{0});
  std::vector<std::vector<Id>> edges(m);
  for (auto& e : edges) {
    const std::size_t size = 1 + rng.below(cap);
    // Partial Fisher-Yates: the first `size` slots become a uniform sample.
    for (std::size_t k = 0; k < size; ++k) std::swap(pool[k], pool[k + rng.below(n - k)]);
    e.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
  }
  return Hypergraph::from_edges(edges, n);
}

PlantedDataset planted_communities(const PlantedConfig& config) {
  const std::size_t n = config.nodes;
  const std::size_t k = config.communities;
  if (k == 0 || n < k || config.edges < k) {
    throw std::invalid_argument("planted: need at least one node and one edge per community");
  }
  if (config.min_edge_size < 2 || config.min_edge_size > config.max_edge_size) {
    throw std::invalid_argument("planted: edge size range must satisfy 2 <= min <= max");
  }
  Rng rng(config.seed);

  PlantedDataset out;
  out.labels.resize(n);
  std::vector<std::vector<Id>> members(k);
  for (std::size_t i = 0; i < n; ++i) {
    out.labels[i] = static_cast<int>(i * k / n);
    members[static_cast<std::size_t>(out.labels[i])].push_back(static_cast<Id>(i));
  }

  std::vector<std::vector<Id>> edges;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t edge_count = config.edges / k + (c < config.edges % k ? 1 : 0);
    std::vector<std::vector<Id>> community_edges(edge_count);
    std::vector<Id> order = members[c];
    shuffle(order, rng);
    for (std::size_t idx = 0; idx < order.size(); ++idx)
      community_edges[idx % edge_count].push_back(order[idx]);
    for (auto& e : community_edges) {
      const std::size_t span = config.max_edge_size - config.min_edge_size + 1;
      const std::size_t target =
          std::min(members[c].size(), config.min_edge_size + rng.below(span));
      while (e.size() < target) {
        const Id candidate = members[c][rng.below(members[c].size())];
        if (std::find(e.begin(), e.end(), candidate) == e.end()) e.push_back(candidate);
      }
      edges.push_back(std::move(e));
    }
  }
  out.graph = Hypergraph::from_edges(edges, n);
  out.features = Matrix::identity(n);
  return out;
}

}  // namespace hnhn
