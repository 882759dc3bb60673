#pragma once

#include <span>
#include <vector>

#include "env/environment.hpp"
#include "optim/advantages.hpp"
#include "optim/config.hpp"
#include "policy/policy.hpp"

namespace rapo {

// |log ratio| beyond this is clamped and the token treated as constant.
inline constexpr double kMaxLogRatio = 30.0;

// Sum_k p_k (log p_k - log q_k), 0 log 0 = 0. Returns +inf when q_k = 0 < p_k.
double kl_exact(const TokenDistribution& p, const TokenDistribution& q);

// d KL(p || q) / d logits of p, restricted to the support of p.
Vector kl_logit_gradient(const TokenDistribution& p, const TokenDistribution& q);

std::vector<double> importance_ratios(const SequencePolicy& policy, const PolicyParams& current,
                                      const PolicyParams& old, const Rollout& rollout);

struct SurrogateResult {
  double loss = 0.0;
  double policy_loss = 0.0;  // clipped-surrogate part
  double kl = 0.0;           // token-averaged KL to the reference
  Matrix grad;
  int clipped_tokens = 0;
  int total_tokens = 0;
  int ratio_overflows = 0;

  double clip_fraction() const {
    return total_tokens ? static_cast<double>(clipped_tokens) / total_tokens : 0.0;
  }
};

// Negated clipped GRPO objective plus beta * KL(current || ref):
//   -(1/G) sum_i (1/|a_i|) sum_t min(rho A, clip(rho) A) + beta * KL.
// old and ref are constants; where min picks the clipped branch the token
// contributes no surrogate gradient.
SurrogateResult grpo_surrogate(const SequencePolicy& policy, const PolicyParams& current,
                               const PolicyParams& old, const PolicyParams& ref,
                               std::span<const Rollout> group, const AdvantageSet& adv,
                               const GrpoConfig& cfg);

}  // namespace rapo
