#include <doctest.h>

#include <cmath>

#include "rle/errors.hpp"
#include "rle/oracle.hpp"
#include "rle/potential.hpp"
#include "rle/stats.hpp"

using namespace rle;

namespace {

DiscretePrior single_atom(double a = 0.7) {
  Eigen::MatrixXd atoms(1, 1);
  atoms << a;
  Eigen::VectorXd probs(1);
  probs << 1.0;
  return DiscretePrior(std::move(atoms), std::move(probs));
}

// Hand-fixed two-section binary system; reference values were evaluated
// symbolically (40-digit arithmetic) before the build.
ProblemInstance hand_instance() {
  const SystemParams params(DiscretePrior::binary(), 1.0, 0.5);
  ProblemInstance inst{.phi = Eigen::MatrixXd(2, 2), .s = Eigen::VectorXd(2),
                       .z = Eigen::VectorXd(2), .y = Eigen::VectorXd(2), .params = params,
                       .ensemble = std::nullopt, .rng_seed = 0, .stream_index = 0,
                       .revealed = {}, .L = 2};
  inst.phi << 0.6, -0.4, 0.3, 0.9;
  inst.s << 1.0, -1.0;
  inst.z << 0.3, -0.2;
  inst.y = inst.phi * inst.s + std::sqrt(params.delta) * inst.z;
  return inst;
}

}  // namespace

TEST_CASE("exact posterior on the hand-computed two-section system") {
  const ProblemInstance inst = hand_instance();

  // independent in-test oracle: plain four-term sums
  double z2 = inst.params.delta * inst.z.squaredNorm();
  double weights[4];
  double means[2] = {0.0, 0.0};
  double norm = 0.0;
  int idx = 0;
  double lse_acc = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      Eigen::VectorXd x(2);
      x << (a ? 1.0 : -1.0), (b ? 1.0 : -1.0);
      const double r2 = (inst.y - inst.phi * x).squaredNorm();
      weights[idx] = std::exp(2.0 * std::log(0.5) - (r2 - z2) / (2.0 * inst.params.delta));
      norm += weights[idx];
      means[0] += weights[idx] * x(0);
      means[1] += weights[idx] * x(1);
      ++idx;
    }
  }
  lse_acc = std::log(norm);
  means[0] /= norm;
  means[1] /= norm;

  const ExactPosterior post = exact_posterior(inst);
  CHECK(post.config_count == 4);
  CHECK(post.log_partition_rel == doctest::Approx(lse_acc).epsilon(1e-12));
  CHECK(post.posterior_mean(0) == doctest::Approx(means[0]).epsilon(1e-12));
  CHECK(post.posterior_mean(1) == doctest::Approx(means[1]).epsilon(1e-12));

  // frozen 40-digit reference values
  CHECK(post.log_partition_rel == doctest::Approx(-1.2659488422678447).epsilon(1e-12));
  CHECK(post.log_partition == doctest::Approx(-1.3309488422678447).epsilon(1e-12));
  CHECK(post.posterior_mean(0) == doctest::Approx(0.7889024837647871).epsilon(1e-12));
  CHECK(post.posterior_mean(1) == doctest::Approx(-0.9819798210658310).epsilon(1e-12));
  CHECK(post.posterior_second_moment == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("exact posterior limits") {
  // uninformative limit: posterior mean near the prior mean
  const SystemParams vague(DiscretePrior::binary(), 1.0, 1e6);
  const ProblemInstance inst = generate_instance(vague, 1, 3);
  const ExactPosterior post = exact_posterior(inst);
  CHECK(std::abs(post.posterior_mean(0)) < 1e-2);

  // near-noiseless over-determined system: exact recovery
  const SystemParams sharp(DiscretePrior::binary(), 2.0, 1e-8);
  const ProblemInstance inst2 = generate_instance(sharp, 8, 4);
  const ExactPosterior post2 = exact_posterior(inst2);
  CHECK((post2.posterior_mean - inst2.s).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("enumeration cap names the feasible size") {
  const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
  const ProblemInstance inst = generate_instance(params, 25, 3);
  CHECK_THROWS_WITH_AS(exact_posterior(inst), doctest::Contains("max feasible L for this prior is 24"),
                       ResourceError);
}

TEST_CASE("mc mutual information: deterministic signal gives exactly zero") {
  const SystemParams params(single_atom(), 0.5, 1.0);
  const McEstimate est = mc_mutual_info(params, 6, 50, 7);
  CHECK(est.value == doctest::Approx(0.0));
  CHECK(est.std_error == doctest::Approx(0.0));
  CHECK(est.trials == 50);
}

TEST_CASE("mc mutual information: zero measurements give exactly zero") {
  const SystemParams params(DiscretePrior::binary(), 1e-9, 1.0);  // M rounds to 0
  const McEstimate est = mc_mutual_info(params, 6, 20, 7);
  CHECK(est.value == doctest::Approx(0.0));
  CHECK(est.std_error == doctest::Approx(0.0));
}

TEST_CASE("mc mutual information approaches the entropy at tiny noise") {
  const SystemParams params(DiscretePrior::binary(), 2.0, 1e-6);
  const McEstimate est = mc_mutual_info(params, 10, 200, 7);
  CHECK(std::abs(est.value - std::log(2.0)) <= 3.0 * est.std_error + 0.02);
}

TEST_CASE("mc mutual information fixture and determinism") {
  const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
  const McEstimate est = mc_mutual_info(params, 12, 200, 777);
  // vicinity of the independent estimate 0.16579 +- 0.0044 (500-trial oracle)
  CHECK(std::abs(est.value - 0.16579) < 5.0 * 0.0044 + 3.0 * est.std_error);
  // byte-determinism, also across the thread pool
  const McEstimate again = mc_mutual_info(params, 12, 200, 777);
  CHECK(est.value == again.value);
  CHECK(est.std_error == again.std_error);
  const McEstimate parallel = mc_mutual_info(params, 12, 200, 777, 2);
  CHECK(est.value == parallel.value);
  CHECK(est.std_error == parallel.std_error);
}

TEST_CASE("mc ymmse basics") {
  const SystemParams params(single_atom(), 0.5, 1.0);
  CHECK(mc_ymmse(params, 6, 20, 7).value == doctest::Approx(0.0));

  const SystemParams sharp(DiscretePrior::binary(), 2.0, 1e-8);
  CHECK(mc_ymmse(sharp, 8, 20, 7).value < 1e-6);
}

TEST_CASE("immse check") {
  const SystemParams atom(single_atom(), 0.5, 1.0);
  const CheckReport trivial = immse_check(atom, 6, 20, -1.0, 7);
  CHECK(trivial.lhs == doctest::Approx(0.0));
  CHECK(trivial.rhs == doctest::Approx(0.0));
  CHECK(trivial.pass);

  const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
  const CheckReport rep = immse_check(params, 12, 400, -1.0, 99);
  INFO("lhs=" << rep.lhs << " rhs=" << rep.rhs << " se=" << rep.std_error);
  CHECK(rep.pass);
  CHECK_FALSE(rep.inconclusive);
  CHECK(rep.lhs == doctest::Approx(rep.rhs).epsilon(0.2));

  // large noise: both sides small and matching; scale ~ (alpha B/2) v/(1+v/delta)
  const SystemParams quiet(DiscretePrior::binary(), 0.5, 50.0);
  const CheckReport far = immse_check(quiet, 10, 400, -1.0, 99);
  CHECK(far.pass);
  const double scale = 0.25 * 1.0 / (1.0 + 1.0 / 50.0);
  CHECK(far.rhs == doctest::Approx(scale).epsilon(0.25));
}

TEST_CASE("nishimori check") {
  const SystemParams atom(single_atom(), 0.5, 1.0);
  const CheckReport trivial = nishimori_check(atom, 6, 20, 7);
  CHECK(trivial.lhs == doctest::Approx(0.49).epsilon(1e-12));  // ||a||^2 both sides
  CHECK(trivial.rhs == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(trivial.pass);

  const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
  const CheckReport rep = nishimori_check(params, 10, 400, 4242);
  INFO("lhs=" << rep.lhs << " rhs=" << rep.rhs << " se=" << rep.std_error);
  CHECK(rep.pass);

  // noiseless: both sides concentrate on the section power
  const SystemParams sharp(DiscretePrior::binary(), 2.0, 1e-8);
  const CheckReport hard = nishimori_check(sharp, 8, 50, 7);
  CHECK(hard.lhs == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(hard.rhs == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("mmse relation gap shrinks with system size") {
  const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
  double gap6 = 0.0, gap12 = 0.0, se6 = 0.0, se12 = 0.0;
  for (int L : {6, 8, 10, 12}) {
    const CheckReport rep = mmse_relation_check(params, L, 1500, 31337);
    CHECK(rep.pass);  // report-only
    INFO("L=" << L << " gap=" << rep.lhs - rep.rhs << " +- " << rep.std_error);
    if (L == 6) {
      gap6 = std::abs(rep.lhs - rep.rhs);
      se6 = rep.std_error;
    }
    if (L == 12) {
      gap12 = std::abs(rep.lhs - rep.rhs);
      se12 = rep.std_error;
    }
  }
  CHECK(gap12 <= gap6 + 2.0 * std::hypot(se6, se12));

  const SystemParams sharp(DiscretePrior::binary(), 2.0, 1e-8);
  const CheckReport tiny = mmse_relation_check(sharp, 6, 30, 7);
  CHECK(std::abs(tiny.lhs) < 1e-6);
  CHECK(std::abs(tiny.rhs) < 1e-6);
}

TEST_CASE("desk-scale upper bound sanity") {
  // one cell of the bound matrix as a unit-level guard
  const SystemParams params(DiscretePrior::bernoulli(0.1), 0.25, 1.0);
  const McEstimate mc = mc_mutual_info(params, 12, 300, 1234);
  const double rs = rs_mutual_info(params);
  CHECK(mc.value <= rs + 3.0 * mc.std_error + 0.05);
}
