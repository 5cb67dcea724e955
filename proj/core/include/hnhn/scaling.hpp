#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hnhn {

struct ScalingOptions {
  std::size_t base_nodes = 2000;
  /// Hyperedges per node; kept fixed so incidences grow with node count.
  double edges_per_node = 0.5;
  std::size_t max_edge_size = 8;
  std::vector<std::size_t> factors{1, 2, 4};
  std::size_t feature_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
};

struct ScalingPoint {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t incidences = 0;
  double seconds = 0.0;  // median forward + backward time
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  /// Least-squares slope of log(seconds) against log(incidences).
  double exponent = 0.0;
};

/// Times one training step (forward, loss, backward) of a 2-layer HNHN on
/// random hypergraphs scaled by each factor at fixed hidden dimension.
ScalingReport measure_scaling(const ScalingOptions& options);

/// Slope of the least-squares line through (log x, log y).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace hnhn
