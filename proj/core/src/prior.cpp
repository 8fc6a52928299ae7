#include "rle/prior.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rle/errors.hpp"

namespace rle {

namespace {

constexpr double kProbSumTol = 1e-9;

}  // namespace

DiscretePrior::DiscretePrior(Eigen::MatrixXd atoms, Eigen::VectorXd probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  const int K = static_cast<int>(atoms_.rows());
  const int B = static_cast<int>(atoms_.cols());
  if (K < 1 || B < 1) throw std::invalid_argument("prior: need at least one atom of dimension >= 1");
  if (probs_.size() != K) throw std::invalid_argument("prior: atoms/probs size mismatch");
  if (!atoms_.allFinite()) throw std::invalid_argument("prior: atoms must be finite");
  for (int i = 0; i < K; ++i) {
    if (!(probs_(i) > 0.0)) throw std::invalid_argument("prior: probabilities must be strictly positive");
    for (int j = i + 1; j < K; ++j) {
      if (atoms_.row(i) == atoms_.row(j)) throw std::invalid_argument("prior: duplicate atoms");
    }
  }
  const double sum = probs_.sum();
  if (std::abs(sum - 1.0) > kProbSumTol)
    throw std::invalid_argument("prior: probabilities sum to " + std::to_string(sum) +
                                ", outside the 1e-9 renormalization window");
  probs_ /= sum;

  log_probs_ = probs_.array().log();
  mean_ = atoms_.transpose() * probs_;
  section_power_ = probs_.dot(atoms_.rowwise().squaredNorm());
  variance_ = section_power_ - mean_.squaredNorm();
  if (variance_ < 0.0) variance_ = 0.0;
  entropy_ = -probs_.dot(log_probs_);
  if (entropy_ < 0.0) entropy_ = 0.0;

  pair_diff_.resize(K * K, B);
  pair_dist_sq_.resize(K, K);
  for (int s = 0; s < K; ++s) {
    for (int j = 0; j < K; ++j) {
      pair_diff_.row(s * K + j) = atoms_.row(j) - atoms_.row(s);
      pair_dist_sq_(s, j) = pair_diff_.row(s * K + j).squaredNorm();
    }
  }
}

DiscretePrior DiscretePrior::binary() {
  Eigen::MatrixXd atoms(2, 1);
  atoms << -1.0, 1.0;
  Eigen::VectorXd probs(2);
  probs << 0.5, 0.5;
  return DiscretePrior(std::move(atoms), std::move(probs));
}

DiscretePrior DiscretePrior::bernoulli(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("bernoulli: rho must be in (0,1)");
  Eigen::MatrixXd atoms(2, 1);
  atoms << 0.0, 1.0;
  Eigen::VectorXd probs(2);
  probs << 1.0 - rho, rho;
  return DiscretePrior(std::move(atoms), std::move(probs));
}

DiscretePrior DiscretePrior::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("prior config: ") + e.what());
  }
  if (!j.contains("B") || !j.contains("atoms") || !j.contains("probs"))
    throw ConfigError("prior config: required keys are B, atoms, probs");
  const int B = j.at("B").get<int>();
  if (B < 1) throw ConfigError("prior config: B must be >= 1");
  const auto& ja = j.at("atoms");
  const auto& jp = j.at("probs");
  if (!ja.is_array() || ja.empty()) throw ConfigError("prior config: atoms must be a non-empty array");
  const int K = static_cast<int>(ja.size());
  Eigen::MatrixXd atoms(K, B);
  for (int i = 0; i < K; ++i) {
    const auto& row = ja.at(i);
    if (row.is_number()) {
      if (B != 1) throw ConfigError("prior config: scalar atoms require B = 1");
      atoms(i, 0) = row.get<double>();
    } else if (row.is_array()) {
      if (static_cast<int>(row.size()) != B)
        throw ConfigError("prior config: atom " + std::to_string(i) + " has dimension " +
                          std::to_string(row.size()) + ", expected B = " + std::to_string(B));
      for (int d = 0; d < B; ++d) atoms(i, d) = row.at(d).get<double>();
    } else {
      throw ConfigError("prior config: atoms must be numbers or arrays");
    }
  }
  if (!jp.is_array() || static_cast<int>(jp.size()) != K)
    throw ConfigError("prior config: probs must match the number of atoms");
  Eigen::VectorXd probs(K);
  for (int i = 0; i < K; ++i) probs(i) = jp.at(i).get<double>();
  try {
    return DiscretePrior(std::move(atoms), std::move(probs));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("prior config: ") + e.what());
  }
}

DiscretePrior DiscretePrior::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("prior config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

DiscretePrior DiscretePrior::parse(const std::string& spec) {
  if (spec == "binary") return binary();
  if (spec.rfind("bernoulli:", 0) == 0) {
    const std::string arg = spec.substr(10);
    try {
      std::size_t pos = 0;
      const double rho = std::stod(arg, &pos);
      if (pos != arg.size()) throw std::invalid_argument("trailing characters");
      return bernoulli(rho);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("prior spec: bad bernoulli parameter '" + arg + "': " + e.what());
    }
  }
  std::ifstream probe(spec);
  if (!probe) throw ConfigError("prior spec: '" + spec + "' is not a named prior or a readable file");
  probe.close();
  return from_json_file(spec);
}

std::string DiscretePrior::to_json() const {
  nlohmann::json j;
  j["B"] = dim();
  auto atoms = nlohmann::json::array();
  for (int i = 0; i < atom_count(); ++i) {
    auto row = nlohmann::json::array();
    for (int d = 0; d < dim(); ++d) row.push_back(atoms_(i, d));
    atoms.push_back(row);
  }
  j["atoms"] = atoms;
  auto probs = nlohmann::json::array();
  for (int i = 0; i < atom_count(); ++i) probs.push_back(probs_(i));
  j["probs"] = probs;
  return j.dump();
}

void DiscretePrior::posterior_moments(const double* y, double noise_var, double* mean_out,
                                      double* var_out) const {
  const int K = atom_count();
  const int B = dim();
  double logits[64];
  double* lp = logits;
  std::vector<double> heap_logits;
  if (K > 64) {
    heap_logits.resize(K);
    lp = heap_logits.data();
  }
  const double inv2v = 1.0 / (2.0 * noise_var);
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < K; ++i) {
    double d2 = 0.0;
    for (int d = 0; d < B; ++d) {
      const double t = y[d] - atoms_(i, d);
      d2 += t * t;
    }
    lp[i] = log_probs_(i) - d2 * inv2v;
    if (lp[i] > mx) mx = lp[i];
  }
  double norm = 0.0, second = 0.0;
  for (int d = 0; d < B; ++d) mean_out[d] = 0.0;
  for (int i = 0; i < K; ++i) {
    const double w = std::exp(lp[i] - mx);
    norm += w;
    double a2 = 0.0;
    for (int d = 0; d < B; ++d) {
      mean_out[d] += w * atoms_(i, d);
      a2 += atoms_(i, d) * atoms_(i, d);
    }
    second += w * a2;
  }
  double m2 = 0.0;
  for (int d = 0; d < B; ++d) {
    mean_out[d] /= norm;
    m2 += mean_out[d] * mean_out[d];
  }
  *var_out = second / norm - m2;
  if (*var_out < 0.0) *var_out = 0.0;
}

Eigen::VectorXd DiscretePrior::posterior_mean(const Eigen::VectorXd& y, double noise_var) const {
  if (!(noise_var > 0.0) || !std::isfinite(noise_var))
    throw std::domain_error("posterior_mean: noise_var must be positive and finite");
  if (y.size() != dim()) throw std::domain_error("posterior_mean: y has wrong dimension");
  if (!y.allFinite()) throw std::domain_error("posterior_mean: y must be finite");
  Eigen::VectorXd mean(dim());
  double var = 0.0;
  posterior_moments(y.data(), noise_var, mean.data(), &var);
  return mean;
}

double section_power(const DiscretePrior& prior) { return prior.section_power(); }

double prior_entropy(const DiscretePrior& prior) { return prior.entropy(); }

Eigen::VectorXd posterior_mean(const DiscretePrior& prior, const Eigen::VectorXd& y,
                               double noise_var) {
  return prior.posterior_mean(y, noise_var);
}

namespace {

void check_snr(double snr) {
  if (std::isnan(snr) || snr < 0.0) throw std::domain_error("channel: snr must be >= 0");
}

// Enumerates the Gaussian integration points for dimension B: tensor
// Gauss-Hermite up to B = 3, shifted-Halton beyond. fn(z, weight).
template <typename Fn>
void for_each_gaussian_point(int B, const QuadratureSettings& quad, Fn&& fn) {
  if (B <= 3) {
    const GaussHermiteRule& rule = gauss_hermite(quad.gh_nodes);
    const int n = quad.gh_nodes;
    double z[3];
    if (B == 1) {
      for (int k = 0; k < n; ++k) {
        z[0] = rule.nodes[k];
        fn(z, rule.weights[k]);
      }
    } else if (B == 2) {
      for (int k0 = 0; k0 < n; ++k0) {
        z[0] = rule.nodes[k0];
        for (int k1 = 0; k1 < n; ++k1) {
          z[1] = rule.nodes[k1];
          fn(z, rule.weights[k0] * rule.weights[k1]);
        }
      }
    } else {
      for (int k0 = 0; k0 < n; ++k0) {
        z[0] = rule.nodes[k0];
        for (int k1 = 0; k1 < n; ++k1) {
          z[1] = rule.nodes[k1];
          const double w01 = rule.weights[k0] * rule.weights[k1];
          for (int k2 = 0; k2 < n; ++k2) {
            z[2] = rule.nodes[k2];
            fn(z, w01 * rule.weights[k2]);
          }
        }
      }
    }
  } else {
    const Eigen::MatrixXd& table = qmc_normal_table(B, quad.qmc_points, quad.qmc_seed);
    const double w = 1.0 / static_cast<double>(table.rows());
    std::vector<double> z(B);
    for (int k = 0; k < table.rows(); ++k) {
      for (int d = 0; d < B; ++d) z[d] = table(k, d);
      fn(z.data(), w);
    }
  }
}

}  // namespace

double channel_mmse(const DiscretePrior& prior, double snr, const QuadratureSettings& quad) {
  check_snr(snr);
  if (snr == 0.0) return prior.variance();
  if (std::isinf(snr)) return 0.0;
  const int K = prior.atom_count();
  const int B = prior.dim();
  const double sq = std::sqrt(snr);
  const Eigen::VectorXd& logp = prior.log_probs();
  const Eigen::VectorXd& p = prior.probs();
  const Eigen::MatrixXd& diff = prior.pair_diff();
  const Eigen::MatrixXd& dsq = prior.pair_dist_sq();

  std::vector<double> logits(K), resid(B);
  double total = 0.0;
  for (int s = 0; s < K; ++s) {
    double acc = 0.0;
    for_each_gaussian_point(B, quad, [&](const double* z, double w) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < K; ++j) {
        double dot = 0.0;
        for (int d = 0; d < B; ++d) dot += z[d] * diff(s * K + j, d);
        logits[j] = logp(j) - 0.5 * snr * dsq(s, j) + sq * dot;
        if (logits[j] > mx) mx = logits[j];
      }
      double norm = 0.0;
      for (int d = 0; d < B; ++d) resid[d] = 0.0;
      for (int j = 0; j < K; ++j) {
        const double wj = std::exp(logits[j] - mx);
        norm += wj;
        for (int d = 0; d < B; ++d) resid[d] += wj * diff(s * K + j, d);
      }
      double r2 = 0.0;
      for (int d = 0; d < B; ++d) r2 += resid[d] * resid[d];
      acc += w * r2 / (norm * norm);
    });
    total += p(s) * acc;
  }
  return total;
}

double channel_mi(const DiscretePrior& prior, double snr, const QuadratureSettings& quad) {
  check_snr(snr);
  if (snr == 0.0) return 0.0;
  if (std::isinf(snr)) return prior.entropy();
  const int K = prior.atom_count();
  const int B = prior.dim();
  const double sq = std::sqrt(snr);
  const Eigen::VectorXd& logp = prior.log_probs();
  const Eigen::VectorXd& p = prior.probs();
  const Eigen::MatrixXd& diff = prior.pair_diff();
  const Eigen::MatrixXd& dsq = prior.pair_dist_sq();

  std::vector<double> logits(K);
  double total = 0.0;
  for (int s = 0; s < K; ++s) {
    double acc = 0.0;
    for_each_gaussian_point(B, quad, [&](const double* z, double w) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < K; ++j) {
        double dot = 0.0;
        for (int d = 0; d < B; ++d) dot += z[d] * diff(s * K + j, d);
        logits[j] = logp(j) - 0.5 * snr * dsq(s, j) + sq * dot;
        if (logits[j] > mx) mx = logits[j];
      }
      double norm = 0.0;
      for (int j = 0; j < K; ++j) norm += std::exp(logits[j] - mx);
      acc += w * (mx + std::log(norm));
    });
    total += p(s) * acc;
  }
  return -total;
}

ChannelPoint channel_point(const DiscretePrior& prior, double snr, const QuadratureSettings& quad) {
  return ChannelPoint{snr, channel_mmse(prior, snr, quad), channel_mi(prior, snr, quad)};
}

}  // namespace rle
