#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hnhn {

inline constexpr double kGradCheckTolerance = 1e-4;
/// Smallest denominator used when forming relative errors.
inline constexpr double kGradCheckFloor = 1e-8;

struct GradCheckOptions {
  std::size_t nodes = 10;
  std::size_t extra_edges = 3;  // random edges added after every node is covered
  std::size_t feature_dim = 4;
  std::size_t hidden_dim = 6;
  std::size_t n_classes = 3;
  std::size_t n_layers = 2;
  double alpha = 0.5;
  double beta = -0.5;
  double step = 1e-6;
  std::uint64_t seed = 0;

  static GradCheckOptions small();
  static GradCheckOptions medium();
};

struct ParameterCheck {
  std::string name;
  std::size_t entries = 0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<ParameterCheck> parameters;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Compares reverse-mode gradients of every model parameter with central
/// finite differences. The fixture is a seeded random hypergraph in which
/// every node has an edge and no edge is a singleton. Dropout is off, and
/// the loss is node cross-entropy plus edge cross-entropy so that both
/// heads receive gradient.
GradCheckReport gradient_check(const GradCheckOptions& options);

}  // namespace hnhn
