#pragma once

#include <Eigen/Dense>
#include <string>

#include "rle/quadrature.hpp"

namespace rle {

/// Finite discrete prior over R^B sections: atoms a_i with probabilities p_i.
/// Immutable after construction; safe to share across threads.
///
/// Probabilities are renormalized when they sum to 1 within 1e-9 and rejected
/// otherwise. Atoms of wildly different magnitudes are accepted but poorly
/// conditioned; rescaling the signal so section powers are O(1) is
/// recommended (see README).
class DiscretePrior {
 public:
  /// atoms: K x B, one atom per row. probs: length K.
  DiscretePrior(Eigen::MatrixXd atoms, Eigen::VectorXd probs);

  static DiscretePrior binary();                  // atoms {-1,+1}, equiprobable
  static DiscretePrior bernoulli(double rho);     // atoms {0,1}, probs {1-rho, rho}
  static DiscretePrior from_json_string(const std::string& text);
  static DiscretePrior from_json_file(const std::string& path);
  /// "binary" | "bernoulli:<rho>" | path to a JSON config.
  static DiscretePrior parse(const std::string& spec);

  int dim() const { return static_cast<int>(atoms_.cols()); }
  int atom_count() const { return static_cast<int>(atoms_.rows()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& probs() const { return probs_; }
  const Eigen::VectorXd& log_probs() const { return log_probs_; }
  const Eigen::VectorXd& mean() const { return mean_; }

  /// v = sum_i p_i ||a_i||^2, the mean section power.
  double section_power() const { return section_power_; }
  /// Trace of the section covariance: v - ||mean||^2.
  double variance() const { return variance_; }
  /// Shannon entropy in nats.
  double entropy() const { return entropy_; }

  /// Posterior mean of one section under y = a + noise, noise ~ N(0, noise_var I).
  Eigen::VectorXd posterior_mean(const Eigen::VectorXd& y, double noise_var) const;

  /// Hot-path denoiser: writes the posterior mean into mean_out (length B) and
  /// the trace of the posterior covariance into *var_out.
  void posterior_moments(const double* y, double noise_var, double* mean_out,
                         double* var_out) const;

  std::string to_json() const;

  /// Pairwise difference tables used by the channel integrals:
  /// diff(s,j) = a_j - a_s (flattened K*K x B) and dist_sq(s,j) = ||a_j - a_s||^2.
  const Eigen::MatrixXd& pair_diff() const { return pair_diff_; }
  const Eigen::MatrixXd& pair_dist_sq() const { return pair_dist_sq_; }

  bool operator==(const DiscretePrior& other) const {
    return atoms_ == other.atoms_ && probs_ == other.probs_;
  }

 private:
  Eigen::MatrixXd atoms_;       // K x B
  Eigen::VectorXd probs_;       // K
  Eigen::VectorXd log_probs_;   // K
  Eigen::VectorXd mean_;        // B
  Eigen::MatrixXd pair_diff_;     // (K*K) x B, row s*K+j
  Eigen::MatrixXd pair_dist_sq_;  // K x K
  double section_power_ = 0.0;
  double variance_ = 0.0;
  double entropy_ = 0.0;
};

double section_power(const DiscretePrior& prior);
double prior_entropy(const DiscretePrior& prior);
Eigen::VectorXd posterior_mean(const DiscretePrior& prior, const Eigen::VectorXd& y,
                               double noise_var);

/// MMSE of the B-dimensional Gaussian denoising channel y = s + z/sqrt(snr)
/// at effective signal-to-noise ratio snr >= 0. snr = 0 returns the prior
/// variance exactly; snr = +inf returns 0.
double channel_mmse(const DiscretePrior& prior, double snr,
                    const QuadratureSettings& quad = {});

/// Mutual information (nats) of the same channel. 0 at snr = 0, tends to the
/// prior entropy as snr -> inf.
double channel_mi(const DiscretePrior& prior, double snr,
                  const QuadratureSettings& quad = {});

struct ChannelPoint {
  double snr;
  double mmse;
  double mi;
};

ChannelPoint channel_point(const DiscretePrior& prior, double snr,
                           const QuadratureSettings& quad = {});

}  // namespace rle
