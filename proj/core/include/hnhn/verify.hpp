#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hnhn {

/// Outcome of one named check aggregated over its instances.
struct SuiteCheck {
  std::string name;
  bool passed = false;
  std::size_t instances = 0;
  double max_error = 0.0;
  std::string detail;  // one human-readable line
};

inline constexpr double kSpectralTolerance = 1e-7;

/// C = A Aᵀ (exact), the linear collapse and the weight-tied star
/// equivalence on seeded random hypergraphs with n, m <= 20 and feature
/// width d <= 8.
std::vector<SuiteCheck> verify_lemmas(std::uint64_t seed, std::size_t instances = 100);

/// For random hypergraphs with n + m <= 60: every star eigenvalue squared
/// lies within tolerance of a clique eigenvalue or of one of the m - n extra
/// zeros, the star spectrum is symmetric about zero, and B has exactly
/// 2 * zeros(C) + m - n zero eigenvalues.
std::vector<SuiteCheck> verify_spectral(std::uint64_t seed, std::size_t instances = 20);

/// Fano pair distinguishability plus the exhaustive relabeling census.
std::vector<SuiteCheck> verify_fano(std::uint64_t seed);

}  // namespace hnhn
