#pragma once

#include <span>
#include <vector>

#include "env/environment.hpp"
#include "optim/config.hpp"
#include "policy/policy.hpp"

namespace rapo {

// Distribution of the feedback-conditioned self-teacher at action position
// prefix.size(): the policy evaluated on context ++ SEP ++ feedback ++ prefix.
// The result is a plain value, so nothing downstream can differentiate
// through the teacher.
TokenDistribution teacher_distribution(const SequencePolicy& policy, const PolicyParams& teacher,
                                       const Observation& context, const TokenSeq& feedback,
                                       std::span<const TokenId> prefix, TokenId separator);

// Teacher distributions for every position of `action`.
std::vector<TokenDistribution> teacher_distributions(const SequencePolicy& policy,
                                                     const PolicyParams& teacher,
                                                     const Observation& context,
                                                     const TokenSeq& feedback,
                                                     const TokenSeq& action, TokenId separator);

// The K admissible tokens with the largest probability under `source`,
// ties broken by lower token id.
std::vector<TokenId> top_k_tokens(const TokenDistribution& source, int k);

struct TopKTerms {
  double head = 0.0;
  double tail = 0.0;
  double p_tail = 0.0;
  double q_tail = 0.0;
};

// Head/tail divergence at one position for a given top-K set.
TopKTerms topk_divergence(const TokenDistribution& student, const TokenDistribution& teacher,
                          std::span<const TokenId> top);

struct SdpoResult {
  double loss = 0.0;      // after the cap
  double raw_loss = 0.0;  // position-averaged head + tail
  bool capped = false;
  Matrix grad;
};

// Top-K head/tail self-distillation loss on the worst rollout, averaged over
// positions and capped at cfg.loss_cap (zero gradient while capped).
SdpoResult sdpo_topk_loss(const SequencePolicy& policy, const PolicyParams& student,
                          std::span<const TokenDistribution> teacher_per_position,
                          const Rollout& worst, const SdpoConfig& cfg);

}  // namespace rapo
