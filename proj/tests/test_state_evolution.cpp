#include <doctest.h>

#include <cmath>

#include "rle/state_evolution.hpp"

using namespace rle;

namespace {

DiscretePrior single_atom(double a = 0.7) {
  Eigen::MatrixXd atoms(1, 1);
  atoms << a;
  Eigen::VectorXd probs(1);
  probs << 1.0;
  return DiscretePrior(std::move(atoms), std::move(probs));
}

constexpr double kDeltaAmpFixture = 0.00165756;
constexpr double kDeltaRsFixture = 0.00586441;

}  // namespace

TEST_CASE("se step") {
  CHECK(se_step(0.3, SystemParams(single_atom(), 1.0, 0.5)) == doctest::Approx(0.0));
  // zero-snr limit: the step returns the prior variance
  const SystemParams noisy(DiscretePrior::binary(), 1.0, 1e12);
  CHECK(se_step(1.0, noisy) == doctest::Approx(1.0).epsilon(1e-9));
  // frozen fixture: mmse at snr = 1/1.1 from the 201-node binary oracle
  const SystemParams params(DiscretePrior::binary(), 1.0, 0.1);
  CHECK(se_step(1.0, params) == doctest::Approx(0.479532561854252).epsilon(1e-9));
}

TEST_CASE("run_se is monotone and hits the right fixed points") {
  const DiscretePrior bern = DiscretePrior::bernoulli(0.1);

  // single atom: fixed point 0 after one step
  const SeTrajectory atom_traj = run_se(SystemParams(single_atom(), 0.5, 1.0), 100, 1e-12);
  CHECK(atom_traj.converged);
  CHECK(atom_traj.final_value() == doctest::Approx(0.0));

  for (double delta : {0.5 * kDeltaAmpFixture, 0.6 * kDeltaRsFixture, 2.0 * kDeltaRsFixture}) {
    const SystemParams params(bern, 0.25, delta);
    const SeTrajectory traj = run_se(params, 200000, 1e-13);
    const auto history = traj.scalar_history();
    for (std::size_t t = 1; t < history.size(); ++t) CHECK(history[t] <= history[t - 1] + 1e-15);
    CHECK(traj.converged);

    const auto fps = find_stationary_points(params);
    REQUIRE(!fps.empty());
    if (delta < kDeltaAmpFixture) {
      // unique regime: limit equals the smallest stationary point
      CHECK(traj.final_value() == doctest::Approx(fps.front()).epsilon(1e-6));
    } else {
      // from v the iteration lands on the largest fixed point
      CHECK(traj.final_value() == doctest::Approx(fps.back()).epsilon(1e-6));
    }
  }
}

TEST_CASE("mid-gap: recursion stalls above the smallest fixed point") {
  const SystemParams params(DiscretePrior::bernoulli(0.1), 0.25,
                            0.5 * (kDeltaAmpFixture + kDeltaRsFixture));
  const auto fps = find_stationary_points(params);
  REQUIRE(fps.size() == 3);
  const SeTrajectory traj = run_se(params, 100000, 1e-12);
  CHECK(traj.final_value() == doctest::Approx(fps.back()).epsilon(1e-6));
  CHECK(e_good(params) == doctest::Approx(fps.front()).epsilon(1e-9));
  CHECK(traj.final_value() > 100.0 * e_good(params));
}

TEST_CASE("build_ensemble: periodic matrix") {
  const CouplingEnsemble e = build_ensemble(EnsembleKind::kPeriodic, 9, 2);
  CHECK(e.boundary.empty());
  for (int r = 0; r < 9; ++r) {
    int nonzero = 0;
    double row_sum = 0.0;
    for (int c = 0; c < 9; ++c) {
      if (e.J(r, c) != 0.0) {
        ++nonzero;
        CHECK(e.J(r, c) == doctest::Approx(9.0 / 5.0));
      }
      row_sum += e.J(r, c);
    }
    CHECK(nonzero == 5);
    CHECK(row_sum / 9.0 == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("build_ensemble: degenerate windows") {
  const CouplingEnsemble diag = build_ensemble(EnsembleKind::kPeriodic, 4, 0);
  CHECK(diag.J.isApprox(4.0 * Eigen::MatrixXd::Identity(4, 4)));

  const CouplingEnsemble full = build_ensemble(EnsembleKind::kPeriodic, 9, 4);
  CHECK(full.J.isApprox(Eigen::MatrixXd::Ones(9, 9)));

  CHECK_THROWS_AS(build_ensemble(EnsembleKind::kPeriodic, 9, 5), std::domain_error);
  CHECK_THROWS_AS(build_ensemble(EnsembleKind::kPeriodic, 9, -1), std::domain_error);
}

TEST_CASE("build_ensemble: seeded matrix") {
  const int gamma = 16, w = 3;
  const CouplingEnsemble e = build_ensemble(EnsembleKind::kSeeded, gamma, w);
  CHECK(e.boundary == std::vector<int>({0, 1, 2, 13, 14, 15}));
  for (int r = 0; r < gamma; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < gamma; ++c) {
      if (std::abs(r - c) > w) CHECK(e.J(r, c) == 0.0);  // no wrap-around
      row_sum += e.J(r, c);
    }
    CHECK(row_sum / gamma == doctest::Approx(1.0).epsilon(1e-14));
  }
  // periodicity broken at the edges strengthens the surviving entries
  CHECK(e.J(0, 0) > e.J(gamma / 2, gamma / 2));
}

TEST_CASE("homogeneous coupled recursion reproduces the plain one bit for bit") {
  const int gamma = 9;
  const CouplingEnsemble hom = build_ensemble(EnsembleKind::kPeriodic, gamma, (gamma - 1) / 2);
  const SystemParams params(DiscretePrior::bernoulli(0.1), 0.25, 0.004);
  const SeTrajectory coupled = run_se_coupled(hom, params, 300, 1e-13, 1);
  const SeTrajectory plain = run_se(params, 300, 1e-13);
  const std::size_t n = std::min(coupled.profile_history.size(), plain.profile_history.size());
  REQUIRE(n > 10);
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::VectorXd& prof = coupled.profile_history[t];
    const double ref = plain.profile_history[t](0);
    for (int r = 0; r < gamma; ++r) CHECK(std::abs(prof(r) - ref) <= 1e-12);
  }
}

TEST_CASE("seeded profile: symmetry, domination, rescue") {
  const DiscretePrior bern = DiscretePrior::bernoulli(0.1);
  const double d_mid = 0.5 * (kDeltaAmpFixture + kDeltaRsFixture);
  const SystemParams params(bern, 0.25, d_mid);
  const CouplingEnsemble ens = build_ensemble(EnsembleKind::kSeeded, 32, 3);

  const SeTrajectory traj = run_se_coupled(ens, params, 100000, 1e-10, 0);
  CHECK(traj.converged);

  // seed symmetry r <-> gamma-1-r
  for (int r = 0; r < 32; ++r)
    CHECK(std::abs(traj.final_profile(r) - traj.final_profile(31 - r)) < 1e-10);

  // componentwise below the uncoupled fixed point from v
  const double e_inf = run_se(params, 100000, 1e-12).final_value();
  for (int r = 0; r < 32; ++r) CHECK(traj.final_profile(r) <= e_inf + 1e-12);

  // mid-gap rescue: the whole profile reaches the good fixed point
  const double eg = e_good(params);
  for (int r = 0; r < 32; ++r) CHECK(traj.final_profile(r) <= eg + 1e-6);
}

TEST_CASE("seeded profile below the algorithmic threshold reaches e_good") {
  const DiscretePrior bern = DiscretePrior::bernoulli(0.1);
  const SystemParams params(bern, 0.25, 0.5 * kDeltaAmpFixture);
  const CouplingEnsemble ens = build_ensemble(EnsembleKind::kSeeded, 16, 2);
  const SeTrajectory traj = run_se_coupled(ens, params, 100000, 1e-10, 0);
  const double eg = e_good(params);
  for (int r = 0; r < 16; ++r) CHECK(traj.final_profile(r) <= eg + 1e-8);
}

TEST_CASE("e_good endpoints") {
  CHECK(e_good(SystemParams(single_atom(), 0.5, 1.0)) == doctest::Approx(0.0));
  const SystemParams low(DiscretePrior::bernoulli(0.1), 0.25, 0.5 * kDeltaAmpFixture);
  CHECK(e_good(low) == doctest::Approx(run_se(low, 100000, 1e-13).final_value()).epsilon(1e-5));
}

TEST_CASE("homogeneous unseeded coupled threshold reduces to the plain one") {
  const DiscretePrior bern = DiscretePrior::bernoulli(0.1);
  const double tol = 2e-4;
  const double plain = delta_amp(bern, 0.25, 1, tol);
  const double coupled =
      delta_amp_coupled(bern, 0.25, 1, 9, 4, tol, EnsembleKind::kPeriodic);
  CHECK(std::abs(coupled - plain) <= 2.0 * tol);
}

TEST_CASE("seeded coupled threshold sits between the two plain thresholds") {
  const DiscretePrior bern = DiscretePrior::bernoulli(0.1);
  const double tol = 1e-4;
  std::string note;
  const double dc = delta_amp_coupled(bern, 0.25, 1, 64, 4, tol, EnsembleKind::kSeeded, {}, &note);
  const double d_amp = delta_amp(bern, 0.25, 1, tol);
  const double d_rs = delta_rs(bern, 0.25, 1, tol);
  CHECK(dc >= d_amp - 2.0 * tol);
  CHECK(dc <= d_rs + 2.0 * tol);
  // at this size the construction saturates: frozen sweep-oracle behavior
  CHECK(dc >= 0.95 * kDeltaRsFixture);
}

TEST_CASE("coupled threshold sentinel without a transition") {
  std::string note;
  const double dc =
      delta_amp_coupled(DiscretePrior::binary(), 2.0, 1, 8, 1, 1e-3, EnsembleKind::kSeeded, {}, &note);
  CHECK(std::isinf(dc));
  CHECK_FALSE(note.empty());
}
