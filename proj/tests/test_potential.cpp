#include <doctest.h>

#include <cmath>

#include "rle/potential.hpp"
#include "rle/rng.hpp"

using namespace rle;

namespace {

DiscretePrior three_atom() {
  Eigen::MatrixXd atoms(3, 1);
  atoms << -1.0, 0.0, 1.0;
  Eigen::VectorXd probs(3);
  probs << 0.25, 0.5, 0.25;
  return DiscretePrior(std::move(atoms), std::move(probs));
}

DiscretePrior single_atom(double a = 0.7) {
  Eigen::MatrixXd atoms(1, 1);
  atoms << a;
  Eigen::VectorXd probs(1);
  probs << 1.0;
  return DiscretePrior(std::move(atoms), std::move(probs));
}

// independent minimization route: dense value scan instead of derivative
// sign changes
double grid_scan_minimum(const SystemParams& params, int points, double* argmin = nullptr) {
  const double v = params.prior.section_power();
  double best = std::numeric_limits<double>::infinity();
  double best_e = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double e = v * i / points;
    const double val = rs_potential(e, params);
    if (val < best) {
      best = val;
      best_e = e;
    }
  }
  if (argmin) *argmin = best_e;
  return best;
}

// thresholds for bernoulli(0.1) at alpha=0.25, frozen from an independent
// 201-node scan oracle evaluated before the build
constexpr double kDeltaAmpFixture = 0.00165756;
constexpr double kDeltaRsFixture = 0.00586441;

}  // namespace

TEST_CASE("psi formula") {
  const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
  CHECK(psi(0.0, params) == doctest::Approx(0.0));
  CHECK(psi(1.0, params) == doctest::Approx(0.25 * (std::log(2.0) - 0.5)).epsilon(1e-15));
  const SystemParams far(DiscretePrior::binary(), 0.5, 1e9);
  CHECK(psi(1.0, far) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(psi(1.0, far) < 1e-9);
  CHECK_THROWS_AS(psi(-0.1, params), std::domain_error);
}

TEST_CASE("effective snr") {
  CHECK(effective_snr(0.0, SystemParams(DiscretePrior::binary(), 1.0, 1.0)) == doctest::Approx(1.0));
  CHECK(effective_snr(999.0, SystemParams(DiscretePrior::binary(), 1.0, 1.0)) ==
        doctest::Approx(1.0 / 1000.0));
  Eigen::MatrixXd atoms(2, 2);
  atoms << 1, 0, 0, 1;
  Eigen::VectorXd probs(2);
  probs << 0.5, 0.5;
  const SystemParams p2(DiscretePrior(atoms, probs), 0.4, 0.3);
  CHECK(effective_snr(0.5, p2) == doctest::Approx(1.0).epsilon(1e-15));
  const SystemParams zero(DiscretePrior::binary(), 1.0, 0.0);
  CHECK_THROWS_AS(effective_snr(0.0, zero), std::domain_error);
}

TEST_CASE("rs potential composes psi and the channel mi") {
  const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
  // frozen from the independent 201-node oracle
  CHECK(rs_potential(1.0, params) == doctest::Approx(0.159708277324722).epsilon(1e-10));
  const SystemParams far(DiscretePrior::binary(), 0.5, 1e9);
  CHECK(rs_potential(0.5, far) < 1e-8);
  CHECK_THROWS_AS(rs_potential(-0.1, params), std::domain_error);
  CHECK_THROWS_AS(rs_potential(1.5, params), std::domain_error);
}

TEST_CASE("derivative closed form matches finite differences") {
  Philox rng(5150, make_stream(StreamPurpose::kMisc, 0));
  const DiscretePrior prior = DiscretePrior::bernoulli(0.2);
  const double v = prior.section_power();
  int checked = 0;
  while (checked < 50) {
    const double e = 0.05 * v + 0.9 * v * rng.next_unit();
    const double delta = 0.05 * std::pow(40.0, rng.next_unit());
    const SystemParams params(prior, 0.3, delta);
    const double h = 1e-6 * v;
    const double numeric =
        (rs_potential(e + h, params) - rs_potential(e - h, params)) / (2.0 * h);
    const double closed = rs_potential_derivative(e, params);
    const double scale = std::max(std::abs(closed), 1e-8);
    CHECK(std::abs(numeric - closed) / scale < 1e-5);
    ++checked;
  }
}

TEST_CASE("analyze potential: degenerate and endpoint cases") {
  const SystemParams atom(single_atom(), 0.5, 1.0);
  const PotentialAnalysis a = analyze_potential(atom);
  CHECK(a.e_tilde == doctest::Approx(0.0));
  CHECK(a.i_rs_min == doctest::Approx(0.0));
  CHECK(a.scenario == Scenario::kNoTransition);

  // very large noise: the minimizer sits at the prior variance (= v here)
  const SystemParams noisy(DiscretePrior::binary(), 0.5, 100.0);
  const PotentialAnalysis b = analyze_potential(noisy);
  double scan_arg = 0.0;
  grid_scan_minimum(noisy, 4096, &scan_arg);
  CHECK(b.e_tilde == doctest::Approx(scan_arg).epsilon(2e-3));
  CHECK(b.e_tilde == doctest::Approx(1.0).epsilon(2e-2));

  CHECK_THROWS_AS(analyze_potential(noisy, 32), std::domain_error);
}

TEST_CASE("analyze potential agrees with a dense value scan") {
  for (double delta : {0.05, 0.3, 1.0}) {
    const SystemParams params(DiscretePrior::binary(), 0.4, delta);
    const PotentialAnalysis analysis = analyze_potential(params);
    const double scanned = grid_scan_minimum(params, 4096);
    CHECK(analysis.i_rs_min <= scanned + 1e-10);
    CHECK(analysis.i_rs_min == doctest::Approx(scanned).epsilon(1e-5));
  }
}

TEST_CASE("first-order window has three stationary points") {
  const SystemParams params(DiscretePrior::bernoulli(0.1), 0.25,
                            0.5 * (kDeltaAmpFixture + kDeltaRsFixture));
  const PotentialAnalysis analysis = analyze_potential(params);
  REQUIRE(analysis.stationary_points.size() == 3);
  CHECK(analysis.scenario == Scenario::kFirstOrder);
  CHECK_FALSE(analysis.assumption_violated);
  // frozen window interior fixed points from the scan oracle
  CHECK(analysis.stationary_points[0] == doctest::Approx(1.055e-5).epsilon(0.05));
  CHECK(analysis.stationary_points[1] == doctest::Approx(0.0189).epsilon(0.01));
  CHECK(analysis.stationary_points[2] == doctest::Approx(0.0446).epsilon(0.01));
  // inside the window but below delta_rs the low branch is the global minimum
  CHECK(analysis.e_tilde == doctest::Approx(analysis.stationary_points[0]));
}

TEST_CASE("stationary points satisfy both characterizations") {
  // fixed points of the mmse map are stationary points of the potential and
  // conversely (the via-derivative and via-residual routes must agree)
  const SystemParams params(DiscretePrior::bernoulli(0.1), 0.25, 0.004);
  const auto fps = find_stationary_points(params);
  REQUIRE(fps.size() == 3);
  const double v = params.prior.section_power();
  for (double e : fps) {
    const double h = 1e-6 * v;
    const double numeric =
        (rs_potential(e + h, params) - rs_potential(e - h, params)) / (2.0 * h);
    CHECK(std::abs(numeric) < 1e-6);
    CHECK(std::abs(e - channel_mmse(params.prior, effective_snr(e, params))) < 1e-6);
  }
}

TEST_CASE("delta_amp sentinels") {
  std::string note;
  CHECK(std::isinf(delta_amp(single_atom(), 0.5, 1, 1e-4, {}, {}, &note)));
  CHECK_FALSE(note.empty());
  // measurement-rich binary system never develops multiplicity
  CHECK(std::isinf(delta_amp(DiscretePrior::binary(), 2.0, 1, 1e-3)));
  CHECK(std::isinf(delta_rs(DiscretePrior::binary(), 2.0, 1, 1e-3)));
  CHECK_THROWS_AS(delta_amp(DiscretePrior::binary(), 2.0, 1, -1.0), std::domain_error);
  CHECK_THROWS_AS(delta_amp(DiscretePrior::binary(), 2.0, 2, 1e-3), std::domain_error);
}

TEST_CASE("bernoulli thresholds match the scan-oracle fixtures") {
  const DiscretePrior prior = DiscretePrior::bernoulli(0.1);
  const double d_amp = delta_amp(prior, 0.25, 1, 1e-5);
  const double d_rs = delta_rs(prior, 0.25, 1, 1e-5);
  CHECK(d_amp == doctest::Approx(kDeltaAmpFixture).epsilon(3e-3));
  CHECK(d_rs == doctest::Approx(kDeltaRsFixture).epsilon(1e-3));
  CHECK(d_amp < d_rs);
  CHECK(classify_thresholds(d_amp, d_rs, 1e-5) == Scenario::kFirstOrder);
}

TEST_CASE("rs mutual information is nonincreasing in delta") {
  const DiscretePrior prior = DiscretePrior::bernoulli(0.1);
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0}) {
    const double mi = rs_mutual_info(SystemParams(prior, 0.25, delta));
    CHECK(mi <= prev + 1e-9);
    prev = mi;
  }
}

TEST_CASE("rs mutual information limits") {
  // small-noise limit reaches the prior entropy
  for (const DiscretePrior& prior :
       {DiscretePrior::binary(), DiscretePrior::bernoulli(0.1), three_atom()}) {
    const double mi = rs_mutual_info(SystemParams(prior, 0.5, 1e-6));
    CHECK(mi == doctest::Approx(prior_entropy(prior)).epsilon(1e-4));
  }
  CHECK(rs_mutual_info(SystemParams(DiscretePrior::binary(), 0.5, 0.0)) ==
        doctest::Approx(std::log(2.0)));
  CHECK(rs_mutual_info(SystemParams(DiscretePrior::binary(), 0.5,
                                    std::numeric_limits<double>::infinity())) ==
        doctest::Approx(0.0));
}

TEST_CASE("predicted ymmse") {
  CHECK(predicted_ymmse(SystemParams(single_atom(), 0.5, 1.0)) == doctest::Approx(0.0));
  CHECK(predicted_ymmse(SystemParams(DiscretePrior::binary(), 0.5, 0.0)) == doctest::Approx(0.0));
  // large noise: E~ -> prior variance and the prediction tends to it
  CHECK(predicted_ymmse(SystemParams(DiscretePrior::binary(), 0.5, 1e9)) ==
        doctest::Approx(1.0).epsilon(1e-3));
  // frozen 1.5*delta_rs fixture from the scan oracle
  const SystemParams p(DiscretePrior::bernoulli(0.1), 0.25, 1.5 * kDeltaRsFixture);
  CHECK(predicted_ymmse(p) == doctest::Approx(0.007528976889).epsilon(1e-4));
  // half of delta_amp: essentially perfect reconstruction predicted
  const SystemParams q(DiscretePrior::bernoulli(0.1), 0.25, 0.5 * kDeltaAmpFixture);
  CHECK(predicted_ymmse(q) < 1e-12);
}
