#pragma once

#include <cstdint>

#include <json.hpp>

#include "env/environment.hpp"
#include "harness/config.hpp"
#include "policy/policy.hpp"

namespace rapo {

// Everything a run needs that is derived from the config alone.
struct World {
  Vocabulary vocab;
  Environment env;
  SequencePolicy policy;

  double feedback_prior = 0.0;

  explicit World(const TrainConfig& cfg);
  PolicyParams zero_params(ParamTag tag) const {
    return PolicyParams::zeros(policy.vocab_size(), policy.dimension(), tag);
  }
  // Starting point shared by student, reference and teacher.
  PolicyParams initial_params(ParamTag tag) const;
};

// Zero weights except on the bag-of-token features of critique codes, which
// map each code to the action it asks for: PREMATURE_ADVICE lowers SUGGEST,
// TEMPLATE lowers TEMPLATE_EMPATHY, IGNORED_EMOTION raises VALIDATE and the
// topic tokens, TOO_LONG raises the terminator. Critique codes only ever
// appear in feedback-conditioned contexts, so these weights leave the
// student's own distributions unchanged and only shape what the self-teacher
// reads from feedback.
PolicyParams feedback_prior_params(const SequencePolicy& policy, const Vocabulary& vocab,
                                   double strength, ParamTag tag);

struct EvalSummary {
  int episodes = 0;
  int turns = 0;
  double mean_true_outcome = 0.0;  // episode start to episode end
  double mean_turn_outcome = 0.0;
  double mean_end_distress = 0.0;
  double mean_entropy = 0.0;  // per sampled position
  double mean_length = 0.0;
  double template_rate = 0.0;  // fraction of turns opening with TEMPLATE_EMPATHY

  nlohmann::ordered_json to_json() const;
};

// Frozen-policy episodes from fresh resets; a pure function of its inputs.
EvalSummary evaluate_policy(const World& world, const PolicyParams& params, int episodes,
                            int turns, std::uint64_t seed, int max_action_len);

}  // namespace rapo
