#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace rle {

/// Settings for the deterministic channel integrals. B = 1..3 use tensor
/// Gauss-Hermite with gh_nodes per axis; B >= 4 falls back to a seeded
/// low-discrepancy (shifted Halton) scheme with qmc_points points.
struct QuadratureSettings {
  int gh_nodes = 61;
  int qmc_points = 200000;
  std::uint64_t qmc_seed = 0x5eedULL;

  bool operator==(const QuadratureSettings&) const = default;
};

/// Probabilists' Gauss-Hermite rule: E[f(Z)] ~ sum_k weights[k] * f(nodes[k])
/// for Z ~ N(0,1). Weights sum to 1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached, thread-safe lookup. n must be in [1, 1024].
const GaussHermiteRule& gauss_hermite(int n);

/// Inverse standard normal CDF, |error| < 1e-15 after Halley refinement.
double inverse_normal_cdf(double p);

/// Shifted-Halton standard-normal point set, cached per (dim, points, seed).
/// Rows are points, columns are coordinates. dim must be in [1, 32].
const Eigen::MatrixXd& qmc_normal_table(int dim, int points, std::uint64_t seed);

}  // namespace rle
