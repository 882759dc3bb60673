#include "oracle/enumeration.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace rapo {

namespace {

void check_bounds(const SequencePolicy& policy, const Environment& env, int max_len) {
  if (max_len < 1 || max_len > kMaxEnumerationLength)
    throw ConfigError("enumeration needs 1 <= max_len <= " +
                      std::to_string(kMaxEnumerationLength));
  for (int pos = 0; pos < std::min(max_len, 2); ++pos) {
    const int branching = policy.grammar().admissible_count(pos, policy.vocab_size());
    if (branching > kMaxEnumerationBranching)
      throw ConfigError("enumeration branching " + std::to_string(branching) + " exceeds " +
                        std::to_string(kMaxEnumerationBranching));
  }
  if (env.constants().reaction_noise)
    throw ConfigError("enumeration requires reaction noise to be disabled");
}

struct Walker {
  const SequencePolicy& policy;
  const PolicyParams& params;
  const Environment& env;
  const DialogueContext& context;
  const Observation obs;
  int max_len;
  const TrajectoryObjective& objective;
  bool with_gradient;
  EnumerationResult result;
  TokenSeq prefix;

  void finish(double prob) {
    const Environment::Reaction reaction =
        env.user_react(context, env.split_action(prefix), SeedStream(0));
    const double value = objective(context, prefix, reaction);
    result.expectation += prob * value;
    result.total_probability += prob;
    ++result.trajectories;
    if (with_gradient && prob > 0.0 && value != 0.0)
      result.gradient.noalias() +=
          (prob * value) * grad_sequence_log_prob(policy, params, obs, prefix);
  }

  void walk(double prob) {
    const TokenDistribution d = policy.step(params, obs, prefix);
    const auto term = policy.grammar().terminator;
    for (TokenId a = 0; a < d.size(); ++a) {
      const double pa = d.probabilities[a];
      if (!std::isfinite(d.log_probabilities[a])) continue;
      prefix.push_back(a);
      const bool done =
          (term && a == *term) || static_cast<int>(prefix.size()) == max_len;
      if (done)
        finish(prob * pa);
      else
        walk(prob * pa);
      prefix.pop_back();
    }
  }
};

EnumerationResult run(const SequencePolicy& policy, const PolicyParams& params,
                      const Environment& env, const DialogueContext& context, int max_len,
                      const TrajectoryObjective& objective, bool with_gradient) {
  check_bounds(policy, env, max_len);
  Walker w{policy, params, env, context, context.observation(), max_len, objective,
           with_gradient, {}, {}};
  if (with_gradient) w.result.gradient = Matrix::Zero(params.weights.rows(), params.weights.cols());
  w.walk(1.0);
  if (std::abs(w.result.total_probability - 1.0) > 1e-9)
    throw NumericError("enumerated probability mass " + std::to_string(w.result.total_probability) +
                       " differs from 1");
  return w.result;
}

}  // namespace

EnumerationResult enumerate_expectation(const SequencePolicy& policy, const PolicyParams& params,
                                        const Environment& env, const DialogueContext& context,
                                        int max_len, const TrajectoryObjective& objective) {
  return run(policy, params, env, context, max_len, objective, false);
}

EnumerationResult policy_gradient_oracle(const SequencePolicy& policy, const PolicyParams& params,
                                         const Environment& env, const DialogueContext& context,
                                         int max_len, const TrajectoryObjective& objective) {
  return run(policy, params, env, context, max_len, objective, true);
}

}  // namespace rapo
