#pragma once

#include <vector>

#include "env/environment.hpp"
#include "policy/policy.hpp"

namespace rapo {

struct RefinedAdvantageReport {
  // log(q(a_t) / pi(a_t)) on the sampled tokens.
  std::vector<double> token_advantages;
  // Analytic full-coverage SD gradient vs the per-position expectation
  // E_{a ~ pi_t}[grad log pi_t(a) * -A_token(a)], computed by enumeration.
  double identity_discrepancy = 0.0;
  // Single-sample estimator sum_t grad log pi(a_t) * -A_token(a_t) / T vs the
  // analytic gradient. Informational: it only agrees in expectation.
  double sampled_discrepancy = 0.0;
  // Implemented ascent direction (GRPO surrogate at rho = 1 minus eta times
  // the SD gradient) vs the refined form A_seq + eta * A_token.
  double combined_discrepancy = 0.0;
  // max |combined - macro| of the implemented directions; exactly 0 at eta = 0.
  double macro_gap = 0.0;
  double max_abs_sd_gradient = 0.0;
  Matrix sd_gradient;
  Matrix combined_direction;
  Matrix macro_direction;
};

// Full-coverage (K = V, no cap) decomposition of the hybrid gradient on a
// single rollout into a sequence-level advantage and an eta-weighted
// token-level log-ratio advantage.
RefinedAdvantageReport refined_advantage_check(const SequencePolicy& policy,
                                               const PolicyParams& student,
                                               const PolicyParams& teacher, const Rollout& worst,
                                               const TokenSeq& feedback, double eta,
                                               TokenId separator, double seq_advantage = 1.0);

}  // namespace rapo
