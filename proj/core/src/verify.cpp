#include "rle/verify.hpp"

#include <cmath>

#include "rle/potential.hpp"
#include "rle/rng.hpp"

namespace rle {

namespace {

std::uint64_t cell_seed(std::uint64_t base, int ordinal) {
  return splitmix64(base ^ (0x7E57ull + static_cast<std::uint64_t>(ordinal)));
}

std::string fmt(double v) { return CsvWriter::num(v); }

}  // namespace

VerifyResult run_verification_suite(const VerifyConfig& cfg) {
  VerifyResult out;
  int ordinal = 0;

  // upper-bound cells
  const DiscretePrior priors[2] = {DiscretePrior::binary(), DiscretePrior::bernoulli(0.1)};
  const char* prior_names[2] = {"binary", "bernoulli0.1"};
  const double alphas[2] = {0.25, 0.5};
  const double deltas[3] = {0.3, 1.0, 3.0};
  for (int pi = 0; pi < 2; ++pi) {
    for (double alpha : alphas) {
      for (double delta : deltas) {
        const SystemParams params(priors[pi], alpha, delta);
        const McEstimate mc = mc_mutual_info(params, cfg.L, cfg.trials, cell_seed(cfg.seed, ordinal),
                                             cfg.jobs);
        const double rs = rs_mutual_info(params);
        CheckReport rep;
        rep.check = std::string("upper-bound:") + prior_names[pi] + ":a" + fmt(alpha) + ":d" + fmt(delta);
        rep.L = cfg.L;
        rep.trials = cfg.trials;
        rep.lhs = mc.value;
        rep.rhs = rs;
        rep.std_error = mc.std_error;
        rep.pass = mc.value <= rs + 3.0 * mc.std_error + cfg.bound_slack_nats;
        out.rows.push_back(rep);
        ++ordinal;
      }
    }
  }

  // measurement-MMSE prediction at half the algorithmic threshold and 1.5x
  // the potential transition
  {
    const DiscretePrior prior = DiscretePrior::bernoulli(0.1);
    const double alpha = 0.25;
    const double d_amp = delta_amp(prior, alpha, 1, cfg.threshold_tol);
    const double d_rs = delta_rs(prior, alpha, 1, cfg.threshold_tol);
    const double points[2] = {0.5 * d_amp, 1.5 * d_rs};
    const char* names[2] = {"ymmse-pred:halfamp", "ymmse-pred:1.5rs"};
    for (int k = 0; k < 2; ++k) {
      const SystemParams params(prior, alpha, points[k]);
      const McEstimate mc = mc_ymmse(params, cfg.L, cfg.trials, cell_seed(cfg.seed, ordinal), cfg.jobs);
      const double pred = predicted_ymmse(params);
      CheckReport rep;
      rep.check = names[k];
      rep.L = cfg.L;
      rep.trials = cfg.trials;
      rep.lhs = mc.value;
      rep.rhs = pred;
      rep.std_error = mc.std_error;
      rep.pass = std::abs(mc.value - pred) <= 3.0 * mc.std_error + cfg.ymmse_rel_slack * pred;
      out.rows.push_back(rep);
      ++ordinal;
    }
  }

  // derivative of the mutual information vs the measurement MMSE
  {
    const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
    CheckReport rep = immse_check(params, cfg.L, cfg.trials_identity, -1.0,
                                  cell_seed(cfg.seed, ordinal), cfg.jobs);
    out.rows.push_back(rep);
    ++ordinal;
  }

  // Nishimori identity
  {
    const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
    CheckReport rep = nishimori_check(params, cfg.L_nishimori, cfg.trials_identity,
                                      cell_seed(cfg.seed, ordinal), cfg.jobs);
    out.rows.push_back(rep);
    ++ordinal;
  }

  // MMSE relation sweep (reported, not gated)
  for (int L : {6, 8, 10, 12}) {
    const SystemParams params(DiscretePrior::binary(), 0.5, 1.0);
    CheckReport rep = mmse_relation_check(params, L, cfg.trials, cell_seed(cfg.seed, ordinal),
                                          cfg.jobs);
    rep.check = "mmse-relation:L" + std::to_string(L);
    out.rows.push_back(rep);
    ++ordinal;
  }

  for (const CheckReport& rep : out.rows) {
    if (!rep.pass) out.hard_fail = true;
  }
  return out;
}

void verify_rows_to_csv(const std::vector<CheckReport>& rows, CsvWriter& csv) {
  csv.columns({"check", "L", "trials", "lhs", "rhs", "std_err", "pass"});
  for (const CheckReport& r : rows) {
    csv.row({r.check, CsvWriter::num(r.L), CsvWriter::num(r.trials), CsvWriter::num(r.lhs),
             CsvWriter::num(r.rhs), CsvWriter::num(r.std_error), r.pass ? "1" : "0"});
    if (r.inconclusive) csv.comment(r.check + ": inconclusive, " + r.note);
  }
}

}  // namespace rle
