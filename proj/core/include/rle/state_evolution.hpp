#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rle/potential.hpp"

namespace rle {

enum class EnsembleKind { kPeriodic, kSeeded };
const char* to_string(EnsembleKind k);

/// Block-variance structure of a spatially coupled measurement matrix:
/// Gamma x Gamma variance matrix J with coupling window w. Periodic kind has
/// J(r,c) = Gamma/(2w+1) on the wrapped band and an empty boundary set;
/// seeded kind breaks the periodicity (wrap-around entries zeroed, rows
/// renormalized to mean 1, which strengthens the surviving boundary entries)
/// and seeds the first and last w blocks.
struct CouplingEnsemble {
  EnsembleKind kind = EnsembleKind::kPeriodic;
  int gamma = 1;
  int w = 0;
  Eigen::MatrixXd J;           // Gamma x Gamma, every row has mean 1
  std::vector<int> boundary;   // seeded block indices, empty for periodic
};

/// boundary_blocks_per_end < 0 means "w blocks at each end" for the seeded
/// kind. Gamma odd is recommended so the homogeneous window w = (Gamma-1)/2
/// is attainable exactly.
CouplingEnsemble build_ensemble(EnsembleKind kind, int gamma, int w,
                                int boundary_blocks_per_end = -1);

/// One SE trajectory. Profiles have length Gamma for coupled runs and
/// length 1 for the plain recursion. History is thinned to every
/// record_every-th iteration (0 = final only); the final profile and
/// iteration count are always exact.
struct SeTrajectory {
  std::vector<Eigen::VectorXd> profile_history;
  Eigen::VectorXd final_profile;
  bool converged = false;
  int iterations = 0;

  double final_value() const { return final_profile(0); }
  std::vector<double> scalar_history() const;
};

/// One application of the mmse map E -> mmse(alpha B/(delta+E)).
double se_step(double E, const SystemParams& params, const QuadratureSettings& quad = {});

/// Iterates from E = v until |change| < tol or max_iter. The sequence is
/// nonincreasing; non-convergence is flagged, never thrown.
SeTrajectory run_se(const SystemParams& params, int max_iter = 100000, double tol = 1e-10,
                    const QuadratureSettings& quad = {});

/// Coupled profile recursion with the boundary blocks pinned to zero.
/// Stops when the sup-norm change drops below tol.
SeTrajectory run_se_coupled(const CouplingEnsemble& ensemble, const SystemParams& params,
                            int max_iter = 100000, double tol = 1e-10, int record_every = 1,
                            const QuadratureSettings& quad = {});

/// Smallest fixed point of the mmse map, from the stationary-point scan.
double e_good(const SystemParams& params, const QuadratureSettings& quad = {});

/// Finite-(Gamma, w) coupled algorithmic threshold: bisection on "the coupled
/// fixed profile is everywhere <= e_good + tol", bracketed by the uncoupled
/// thresholds and capped at delta_rs. Returns +inf when the uncoupled system
/// has no transition.
double delta_amp_coupled(const DiscretePrior& prior, double alpha, int B, int gamma, int w,
                         double tol, EnsembleKind kind = EnsembleKind::kSeeded,
                         const QuadratureSettings& quad = {}, std::string* note = nullptr);

}  // namespace rle
