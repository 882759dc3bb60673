#pragma once

#include <functional>

#include "env/environment.hpp"
#include "policy/policy.hpp"

namespace rapo {

inline constexpr int kMaxEnumerationLength = 4;
inline constexpr int kMaxEnumerationBranching = 6;

// F(context, action tokens, user reaction).
using TrajectoryObjective =
    std::function<double(const DialogueContext&, const TokenSeq&, const Environment::Reaction&)>;

struct EnumerationResult {
  double expectation = 0.0;
  double total_probability = 0.0;
  long trajectories = 0;
  Matrix gradient;  // filled by policy_gradient_oracle only
};

// Exact E_{a ~ pi}[F] over every action the sampler can produce with at most
// max_len tokens (ending at the terminator or at max_len). Refuses instances
// beyond the length/branching caps or with reaction noise enabled.
EnumerationResult enumerate_expectation(const SequencePolicy& policy, const PolicyParams& params,
                                        const Environment& env, const DialogueContext& context,
                                        int max_len, const TrajectoryObjective& objective);

// sum_a pi(a) F(a) grad log pi(a), exact by enumeration.
EnumerationResult policy_gradient_oracle(const SequencePolicy& policy, const PolicyParams& params,
                                         const Environment& env, const DialogueContext& context,
                                         int max_len, const TrajectoryObjective& objective);

}  // namespace rapo
