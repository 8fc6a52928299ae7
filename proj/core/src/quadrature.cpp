#include "rle/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "rle/rng.hpp"

namespace rle {

namespace {

GaussHermiteRule compute_gauss_hermite(int n) {
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
  // polynomials: zero diagonal, off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = v0 * v0;  // first moment of N(0,1) is 1
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  if (n < 1 || n > 1024) throw std::domain_error("gauss_hermite: node count out of range");
  static std::mutex mtx;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
  return it->second;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p outside (0,1)");
  // Acklam's rational approximation ...
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // ... plus one Halley step against the exact CDF.
  const double kSqrt2Pi = 2.5066282746310005024157652848110;
  const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = err * kSqrt2Pi * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

constexpr int kHaltonPrimes[32] = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,
                                   37,  41,  43,  47,  53,  59,  61,  67,  71,  73,  79,
                                   83,  89,  97,  101, 103, 107, 109, 113, 127, 131};

double radical_inverse(std::uint64_t k, int base) {
  double inv_base = 1.0 / base;
  double f = inv_base;
  double r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv_base;
  }
  return r;
}

Eigen::MatrixXd compute_qmc_table(int dim, int points, std::uint64_t seed) {
  Eigen::MatrixXd table(points, dim);
  for (int d = 0; d < dim; ++d) {
    Philox rng(seed, make_stream(StreamPurpose::kMisc, static_cast<std::uint64_t>(d)));
    const double shift = rng.next_unit();
    for (int k = 0; k < points; ++k) {
      double u = radical_inverse(static_cast<std::uint64_t>(k) + 1, kHaltonPrimes[d]) + shift;
      u -= std::floor(u);
      u = std::min(std::max(u, 0x1p-53), 1.0 - 0x1p-53);
      table(k, d) = inverse_normal_cdf(u);
    }
  }
  return table;
}

}  // namespace

const Eigen::MatrixXd& qmc_normal_table(int dim, int points, std::uint64_t seed) {
  if (dim < 1 || dim > 32) throw std::domain_error("qmc_normal_table: dim out of range");
  if (points < 1) throw std::domain_error("qmc_normal_table: points must be positive");
  static std::mutex mtx;
  static std::map<std::tuple<int, int, std::uint64_t>, Eigen::MatrixXd> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_tuple(dim, points, seed);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, compute_qmc_table(dim, points, seed)).first;
  return it->second;
}

}  // namespace rle
