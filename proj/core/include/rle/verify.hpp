#pragma once

#include <cstdint>
#include <vector>

#include "rle/csv.hpp"
#include "rle/oracle.hpp"

namespace rle {

/// Parameters of the oracle verification suite (upper bound, measurement-MMSE
/// prediction, I-MMSE derivative, Nishimori identity, MMSE relation sweep).
struct VerifyConfig {
  int L = 12;
  int L_nishimori = 10;
  int trials = 500;
  int trials_identity = 1000;  // I-MMSE and Nishimori cells
  std::uint64_t seed = 1;
  int jobs = 1;
  double bound_slack_nats = 0.05;   // finite-size slack on the upper bound
  double ymmse_rel_slack = 0.10;    // relative slack on the MMSE prediction
  double threshold_tol = 1e-4;
};

struct VerifyResult {
  std::vector<CheckReport> rows;
  bool hard_fail = false;
};

VerifyResult run_verification_suite(const VerifyConfig& config);

/// Serializes suite rows as `check,L,trials,lhs,rhs,std_err,pass`.
void verify_rows_to_csv(const std::vector<CheckReport>& rows, CsvWriter& csv);

}  // namespace rle
