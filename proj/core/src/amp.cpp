#include "rle/amp.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "rle/errors.hpp"
#include "rle/rng.hpp"

namespace rle {

std::size_t memory_guard_bytes() {
  const char* env = std::getenv("RLE_MAX_MEM_MIB");
  std::size_t mib = 2048;
  if (env != nullptr) {
    const long parsed = std::atol(env);
    if (parsed > 0) mib = static_cast<std::size_t>(parsed);
  }
  return mib * (1ull << 20);
}

namespace {

void check_memory(int M, int N) {
  const std::size_t need =
      (static_cast<std::size_t>(M) * N + 4ull * N + 4ull * M) * sizeof(double);
  const std::size_t cap = memory_guard_bytes();
  if (need > cap)
    throw ResourceError("instance of size " + std::to_string(M) + "x" + std::to_string(N) +
                        " needs " + std::to_string(need >> 20) + " MiB, above the cap of " +
                        std::to_string(cap >> 20) + " MiB (override with RLE_MAX_MEM_MIB)");
}

int draw_atom(const DiscretePrior& prior, Philox& rng) {
  const double u = rng.next_unit();
  double acc = 0.0;
  const int K = prior.atom_count();
  for (int i = 0; i < K; ++i) {
    acc += prior.probs()(i);
    if (u <= acc) return i;
  }
  return K - 1;
}

void fill_signal_and_noise(ProblemInstance& inst, const SystemParams& params, int L,
                           std::uint64_t seed, std::uint64_t stream_index) {
  const int B = params.B;
  Philox rng_s(seed, make_stream(StreamPurpose::kSignal, stream_index));
  inst.s.resize(static_cast<Eigen::Index>(L) * B);
  for (int l = 0; l < L; ++l) {
    const int k = draw_atom(params.prior, rng_s);
    for (int d = 0; d < B; ++d) inst.s(static_cast<Eigen::Index>(l) * B + d) = params.prior.atoms()(k, d);
  }
  Philox rng_z(seed, make_stream(StreamPurpose::kNoise, stream_index));
  const int M = inst.M();
  inst.z.resize(M);
  for (int mu = 0; mu < M; ++mu) inst.z(mu) = rng_z.next_normal();
  inst.y = inst.phi * inst.s + std::sqrt(params.delta) * inst.z;
}

}  // namespace

ProblemInstance generate_instance(const SystemParams& params, int L, std::uint64_t rng_seed,
                                  std::uint64_t stream_index) {
  if (L < 1) throw std::domain_error("generate_instance: L must be >= 1");
  const int N = L * params.B;
  const int M = static_cast<int>(std::lround(params.alpha * N));
  if (M < 0) throw std::domain_error("generate_instance: nonpositive M");
  check_memory(M, N);

  ProblemInstance inst{.phi = {}, .s = {}, .z = {}, .y = {}, .params = params,
                       .ensemble = std::nullopt, .rng_seed = rng_seed,
                       .stream_index = stream_index, .revealed = {}, .L = L};
  inst.phi.resize(M, N);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(L));
  Philox rng(rng_seed, make_stream(StreamPurpose::kMatrix, stream_index));
  for (int mu = 0; mu < M; ++mu)
    for (int i = 0; i < N; ++i) inst.phi(mu, i) = sigma * rng.next_normal();
  fill_signal_and_noise(inst, params, L, rng_seed, stream_index);
  return inst;
}

ProblemInstance generate_coupled_instance(const CouplingEnsemble& ensemble,
                                          const SystemParams& params, int L,
                                          std::uint64_t rng_seed, std::uint64_t stream_index) {
  if (L < 1) throw std::domain_error("generate_coupled_instance: L must be >= 1");
  const int gamma = ensemble.gamma;
  const int N = L * params.B;
  const int M = static_cast<int>(std::lround(params.alpha * N));
  if (L % gamma != 0 || M % gamma != 0) {
    // name the nearest L that satisfies both divisibility constraints
    long best = -1;
    for (long k = 1; k <= 4 * static_cast<long>(L) / gamma + 8; ++k) {
      const long cand = static_cast<long>(gamma) * k;
      const long m = std::lround(params.alpha * cand * params.B);
      if (m % gamma == 0 && (best < 0 || std::abs(cand - L) < std::abs(best - L))) best = cand;
    }
    throw std::domain_error("generate_coupled_instance: gamma=" + std::to_string(gamma) +
                            " must divide L=" + std::to_string(L) + " and M=" + std::to_string(M) +
                            (best > 0 ? "; nearest valid L is " + std::to_string(best) : ""));
  }
  check_memory(M, N);

  ProblemInstance inst{.phi = {}, .s = {}, .z = {}, .y = {}, .params = params,
                       .ensemble = ensemble, .rng_seed = rng_seed,
                       .stream_index = stream_index, .revealed = {}, .L = L};
  inst.phi.resize(M, N);
  const int rows_per_block = M / gamma;
  const int cols_per_block = N / gamma;
  const double inv_sqrt_l = 1.0 / std::sqrt(static_cast<double>(L));
  Philox rng(rng_seed, make_stream(StreamPurpose::kMatrix, stream_index));
  // same draw order as the homogeneous generator, scaled per block, so a
  // homogeneous ensemble reproduces generate_instance exactly
  for (int mu = 0; mu < M; ++mu) {
    const int r = mu / rows_per_block;
    for (int i = 0; i < N; ++i) {
      const int c = i / cols_per_block;
      const double n = rng.next_normal();
      inst.phi(mu, i) = std::sqrt(ensemble.J(r, c)) * inv_sqrt_l * n;
    }
  }
  fill_signal_and_noise(inst, params, L, rng_seed, stream_index);

  if (!ensemble.boundary.empty()) {
    const int sections_per_block = L / gamma;
    for (int c : ensemble.boundary)
      for (int l = c * sections_per_block; l < (c + 1) * sections_per_block; ++l)
        inst.revealed.push_back(l);
  }
  return inst;
}

AmpTrajectory run_amp(const ProblemInstance& inst, const AmpOptions& opts) {
  const SystemParams& params = inst.params;
  const int B = params.B;
  const int L = inst.L;
  const int N = inst.N();
  const int M = inst.M();
  if (N != L * B || inst.y.size() != M)
    throw std::domain_error("run_amp: instance dimensions are inconsistent");
  const double v = params.prior.section_power();
  const double delta = params.delta;

  const int gamma = inst.ensemble ? inst.ensemble->gamma : 1;
  const Eigen::MatrixXd J = inst.ensemble ? inst.ensemble->J : Eigen::MatrixXd::Ones(1, 1);
  const int rows_per_block = M / gamma;
  const int sections_per_block = L / gamma;

  std::vector<char> is_revealed(L, 0);
  for (int l : inst.revealed) is_revealed[l] = 1;

  AmpTrajectory traj;
  Eigen::VectorXd xhat(N);
  Eigen::VectorXd tau(L);  // per-section posterior variance (trace)
  for (int l = 0; l < L; ++l) {
    if (is_revealed[l]) {
      xhat.segment(static_cast<Eigen::Index>(l) * B, B) =
          inst.s.segment(static_cast<Eigen::Index>(l) * B, B);
      tau(l) = 0.0;
    } else {
      xhat.segment(static_cast<Eigen::Index>(l) * B, B) = params.prior.mean();
      tau(l) = params.prior.variance();
    }
  }

  const Eigen::VectorXd phis = inst.phi * inst.s;
  Eigen::VectorXd p = inst.phi * xhat;
  traj.mse_per_iter.push_back((inst.s - xhat).squaredNorm() / L);
  traj.ymmse_per_iter.push_back((phis - p).squaredNorm() / M);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(M);
  Eigen::VectorXd v_block(gamma), sigma2(gamma), omega(M), corr(N), r_vec(N);
  Eigen::VectorXd xhat_new(N);
  Eigen::VectorXd mean_buf(B);

  for (int t = 1; t <= opts.max_iter; ++t) {
    // per-block output variance V_r = (1/L) sum_c J(r,c) sum_{l in c} tau_l
    Eigen::VectorXd tau_block = Eigen::VectorXd::Zero(gamma);
    for (int l = 0; l < L; ++l) tau_block(l / sections_per_block) += tau(l);
    for (int r = 0; r < gamma; ++r) {
      double acc = 0.0;
      for (int c = 0; c < gamma; ++c) acc += J(r, c) * tau_block(c);
      v_block(r) = acc / L;
    }
    // Onsager-corrected output and scaled residual
    for (int mu = 0; mu < M; ++mu) {
      const int r = mu / rows_per_block;
      omega(mu) = p(mu) - v_block(r) * g(mu);
      g(mu) = (inst.y(mu) - omega(mu)) / (delta + v_block(r));
    }
    // pseudo-channel noise per column block
    for (int c = 0; c < gamma; ++c) {
      double acc = 0.0;
      for (int r = 0; r < gamma; ++r) acc += J(r, c) / (delta + v_block(r));
      sigma2(c) = 1.0 / (acc * rows_per_block / L);
    }
    corr.noalias() = inst.phi.transpose() * g;
    for (int l = 0; l < L; ++l) {
      const int c = l / sections_per_block;
      for (int d = 0; d < B; ++d) {
        const Eigen::Index i = static_cast<Eigen::Index>(l) * B + d;
        r_vec(i) = xhat(i) + sigma2(c) * corr(i);
      }
    }
    // denoise section-wise
    double change2 = 0.0;
    for (int l = 0; l < L; ++l) {
      const Eigen::Index off = static_cast<Eigen::Index>(l) * B;
      double t_new;
      if (is_revealed[l]) {
        mean_buf = inst.s.segment(off, B);
        t_new = 0.0;
      } else {
        params.prior.posterior_moments(r_vec.data() + off, sigma2(l / sections_per_block),
                                       mean_buf.data(), &t_new);
      }
      for (int d = 0; d < B; ++d) {
        const double nd = (1.0 - opts.damp) * mean_buf(d) + opts.damp * xhat(off + d);
        const double diff = nd - xhat(off + d);
        change2 += diff * diff;
        xhat_new(off + d) = nd;
      }
      tau(l) = (1.0 - opts.damp) * t_new + opts.damp * tau(l);
    }
    xhat.swap(xhat_new);

    p.noalias() = inst.phi * xhat;
    const double mse = (inst.s - xhat).squaredNorm() / L;
    traj.mse_per_iter.push_back(mse);
    traj.ymmse_per_iter.push_back((phis - p).squaredNorm() / M);

    if (mse > 10.0 * v) {
      traj.converged = false;
      break;
    }
    if (std::sqrt(change2 / L) < opts.tol) {
      traj.converged = true;
      break;
    }
  }
  traj.estimate = xhat;
  return traj;
}

double empirical_ymmse(const ProblemInstance& inst, const Eigen::VectorXd& estimate) {
  if (estimate.size() != inst.N()) throw std::domain_error("empirical_ymmse: size mismatch");
  return (inst.phi * (inst.s - estimate)).squaredNorm() / inst.M();
}

}  // namespace rle
