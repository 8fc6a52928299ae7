#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rle/prior.hpp"

namespace rle {

/// Parameters of one linear-estimation system: measurement rate alpha = M/N,
/// section size B (equal to prior.dim()), noise variance delta, prior.
struct SystemParams {
  DiscretePrior prior;
  double alpha;
  double delta;
  int B;

  SystemParams(DiscretePrior prior_, double alpha_, double delta_)
      : prior(std::move(prior_)), alpha(alpha_), delta(delta_), B(prior.dim()) {
    if (!(alpha > 0.0)) throw std::invalid_argument("params: alpha must be positive");
    if (std::isnan(delta) || delta < 0.0) throw std::invalid_argument("params: delta must be >= 0");
  }

  SystemParams with_delta(double new_delta) const {
    return SystemParams(prior, alpha, new_delta);
  }
};

enum class Scenario { kNoTransition, kHigherOrder, kFirstOrder };
const char* to_string(Scenario s);

/// Result of scanning the potential at one (params) point.
struct PotentialAnalysis {
  double e_tilde = 0.0;   // global minimizer on [0, v]
  double i_rs_min = 0.0;  // value at the minimizer, nats
  std::vector<double> stationary_points;  // sorted
  Scenario scenario = Scenario::kNoTransition;
  bool degenerate = false;  // two global minima within tie tolerance
  double e_tilde_alt = std::numeric_limits<double>::quiet_NaN();
  bool assumption_violated = false;  // more than three stationary points
  std::string note;
};

/// psi(E; delta) = alpha*B*[ln(1 + E/delta) - E/(E + delta)]/2.
double psi(double E, const SystemParams& params);

/// Effective channel snr alpha*B/(delta + E).
double effective_snr(double E, const SystemParams& params);

/// The potential psi(E) + channel_mi(effective_snr(E)). E must lie in [0, v].
double rs_potential(double E, const SystemParams& params, const QuadratureSettings& quad = {});

/// Closed-form dE derivative: alpha*B*(E - mmse(snr(E)))/(2*(delta+E)^2).
double rs_potential_derivative(double E, const SystemParams& params,
                               const QuadratureSettings& quad = {});

/// All zeros of E - mmse(effective_snr(E)) on [0, v]: the stationary points
/// of the potential and equally the fixed points of the one-step mmse map.
std::vector<double> find_stationary_points(const SystemParams& params, int grid_size = 1024,
                                           const QuadratureSettings& quad = {});

/// Scans the derivative on a uniform grid, refines sign changes by bisection,
/// evaluates the potential at every candidate plus both endpoints, and picks
/// the global minimizer (ties broken toward smaller E).
PotentialAnalysis analyze_potential(const SystemParams& params, int grid_size = 1024,
                                    const QuadratureSettings& quad = {});

/// Knobs for the threshold searches. Noise is scanned octave by octave from
/// delta_lo up to delta_max, each doubling segment in scan_substeps linear
/// steps, so multiplicity windows narrower than ~9% in delta are still hit;
/// the window edge is then bisected to the requested tolerance.
struct ThresholdOptions {
  double delta_lo = 1e-4;
  double delta_max = 1e4;
  int scan_substeps = 8;
  int grid_size = 1024;
};

/// Largest noise below which the fixed-point equation has a unique solution.
/// Returns +inf when no multiplicity is detected up to delta_max.
double delta_amp(const DiscretePrior& prior, double alpha, int B, double tol,
                 const QuadratureSettings& quad = {}, const ThresholdOptions& opts = {},
                 std::string* note = nullptr);

/// Noise at which the two local minima exchange global-minimum status.
/// +inf when no first-order window exists; always >= delta_amp.
double delta_rs(const DiscretePrior& prior, double alpha, int B, double tol,
                const QuadratureSettings& quad = {}, const ThresholdOptions& opts = {},
                std::string* note = nullptr);

/// Family-level scenario from the two thresholds.
Scenario classify_thresholds(double d_amp, double d_rs, double tol);

/// Predicted measurement MMSE  E~/(1 + E~/delta). Refuses a unique answer at
/// a degenerate (two-global-minima) point.
double predicted_ymmse(const SystemParams& params, const QuadratureSettings& quad = {});

/// min_E i_rs(E; delta); entropy at delta = 0, zero at delta = inf.
double rs_mutual_info(const SystemParams& params, const QuadratureSettings& quad = {});

inline constexpr double kInfThreshold = std::numeric_limits<double>::infinity();

}  // namespace rle
