#pragma once

#include <cstdint>
#include <string>

#include "rle/amp.hpp"

namespace rle {

/// Exact posterior summary from full enumeration of the K^L section-atom
/// assignments (discrete priors make the configuration space finite).
struct ExactPosterior {
  /// ln of the partition function in the residual-quadratic normalization.
  double log_partition = 0.0;
  /// ln of the partition function measured relative to the weight of the
  /// planted configuration; the per-section mutual information estimator is
  /// -log_partition_rel / L with the realized rate M/N.
  double log_partition_rel = 0.0;
  Eigen::VectorXd posterior_mean;        // length N
  double posterior_second_moment = 0.0;  // posterior average of ||x||^2
  std::int64_t config_count = 0;
};

/// Hard cap: K^L <= 2^24 enumerated states.
ExactPosterior exact_posterior(const ProblemInstance& instance);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

/// Monte Carlo over instances of the per-section mutual information.
McEstimate mc_mutual_info(const SystemParams& params, int L, int trials, std::uint64_t rng_seed,
                          int jobs = 1);

/// Monte Carlo over instances of ||phi(s - <x>)||^2 / M.
McEstimate mc_ymmse(const SystemParams& params, int L, int trials, std::uint64_t rng_seed,
                    int jobs = 1);

struct CheckReport {
  std::string check;
  int L = 0;
  int trials = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;  // of the per-trial lhs-rhs difference
  bool pass = false;
  bool inconclusive = false;
  std::string note;
};

/// Central finite difference of the mutual information in 1/delta against
/// (alpha B/2) * ymmse at the midpoint, with common random numbers across the
/// three noise levels. d_delta <= 0 selects the default delta/50.
CheckReport immse_check(const SystemParams& params, int L, int trials, double d_delta,
                        std::uint64_t rng_seed, int jobs = 1);

/// Tests E[S.<X>] = E[||<X>||^2] (per section) within 3 combined std errors.
CheckReport nishimori_check(const SystemParams& params, int L, int trials,
                            std::uint64_t rng_seed, int jobs = 1);

/// Reports the gap between the measurement MMSE and mse/(1 + mse/delta);
/// the gap is the finite-size term, reported rather than gated.
CheckReport mmse_relation_check(const SystemParams& params, int L, int trials,
                                std::uint64_t rng_seed, int jobs = 1);

}  // namespace rle
