#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rle/state_evolution.hpp"

namespace rle {

/// One concrete realization y = phi s + z sqrt(delta). Immutable after
/// generation; regenerate from (params, L, rng_seed) rather than storing.
struct ProblemInstance {
  Eigen::MatrixXd phi;  // M x N
  Eigen::VectorXd s;    // N = L*B
  Eigen::VectorXd z;    // M
  Eigen::VectorXd y;    // M
  SystemParams params;
  std::optional<CouplingEnsemble> ensemble;
  std::uint64_t rng_seed = 0;
  std::uint64_t stream_index = 0;
  std::vector<int> revealed;  // seeded section indices, sorted
  int L = 0;

  int M() const { return static_cast<int>(phi.rows()); }
  int N() const { return static_cast<int>(phi.cols()); }
};

/// Active memory cap in bytes; RLE_MAX_MEM_MIB overrides the 2 GiB default.
std::size_t memory_guard_bytes();

/// Homogeneous instance: phi entries i.i.d. N(0, 1/L), sections i.i.d. from
/// the prior, noise N(0,1). Streams are split by purpose (matrix / signal /
/// noise) within (rng_seed, stream_index); see rng.hpp.
ProblemInstance generate_instance(const SystemParams& params, int L, std::uint64_t rng_seed,
                                  std::uint64_t stream_index = 0);

/// Block-structured instance: entries in block (r,c) are N(0, J(r,c)/L).
/// gamma must divide both L and M; seeded ensembles mark the sections of the
/// boundary blocks as revealed.
ProblemInstance generate_coupled_instance(const CouplingEnsemble& ensemble,
                                          const SystemParams& params, int L,
                                          std::uint64_t rng_seed,
                                          std::uint64_t stream_index = 0);

struct AmpOptions {
  int max_iter = 200;
  double tol = 1e-8;   // RMS estimate change per section
  double damp = 0.0;   // 0 = undamped
};

struct AmpTrajectory {
  std::vector<double> mse_per_iter;    // [0] is the prior-mean initialization
  std::vector<double> ymmse_per_iter;  // same indexing
  bool converged = false;
  Eigen::VectorXd estimate;

  int iterations() const { return static_cast<int>(mse_per_iter.size()) - 1; }
  double final_mse() const { return mse_per_iter.back(); }
};

/// Sum-product AMP with the prior's posterior-mean denoiser and Onsager
/// correction; block variances handle coupled instances. Revealed sections
/// stay clamped to the truth with zero variance. Divergence (MSE beyond
/// 10 v) halts with converged = false.
AmpTrajectory run_amp(const ProblemInstance& instance, const AmpOptions& opts = {});

/// ||phi (s - estimate)||^2 / M for this realization.
double empirical_ymmse(const ProblemInstance& instance, const Eigen::VectorXd& estimate);

}  // namespace rle
