#include "harness/evaluation.hpp"

#include "common/errors.hpp"

namespace rapo {

World::World(const TrainConfig& cfg)
    : vocab(Vocabulary::standard()),
      env(vocab, cfg.env),
      policy(FeatureMap(vocab.size(), cfg.feature_spec()), ActionGrammar::chain_of_supporting(vocab)),
      feedback_prior(cfg.feedback_prior) {}

PolicyParams World::initial_params(ParamTag tag) const {
  return feedback_prior_params(policy, vocab, feedback_prior, tag);
}

PolicyParams feedback_prior_params(const SequencePolicy& policy, const Vocabulary& vocab,
                                   double strength, ParamTag tag) {
  PolicyParams p = PolicyParams::zeros(policy.vocab_size(), policy.dimension(), tag);
  if (strength == 0.0) return p;
  // Bag-of-token features come first, indexed by token id.
  auto set = [&](const char* action, const char* critique, double w) {
    p.weights(vocab.id(action), vocab.id(critique)) = w * strength;
  };
  set("SUGGEST", "CRIT_PREMATURE_ADVICE", -1.0);
  set("TEMPLATE_EMPATHY", "CRIT_TEMPLATE", -1.0);
  set("VALIDATE", "CRIT_IGNORED_EMOTION", 1.0);
  for (const char* topic : {"TOPIC_WORK", "TOPIC_FAMILY", "TOPIC_HEALTH"})
    set(topic, "CRIT_IGNORED_EMOTION", 1.0);
  set("EOT", "CRIT_TOO_LONG", 1.0);
  return p;
}

nlohmann::ordered_json EvalSummary::to_json() const {
  nlohmann::ordered_json j;
  j["episodes"] = episodes;
  j["turns"] = turns;
  j["mean_true_outcome"] = mean_true_outcome;
  j["mean_turn_outcome"] = mean_turn_outcome;
  j["mean_end_distress"] = mean_end_distress;
  j["mean_entropy"] = mean_entropy;
  j["mean_length"] = mean_length;
  j["template_rate"] = template_rate;
  return j;
}

EvalSummary evaluate_policy(const World& world, const PolicyParams& params, int episodes,
                            int turns, std::uint64_t seed, int max_action_len) {
  if (episodes < 1 || turns < 1) throw ConfigError("evaluation needs episodes >= 1 and turns >= 1");
  const Environment& env = world.env;
  EvalSummary s;
  s.episodes = episodes;
  s.turns = turns;
  double entropy = 0.0;
  long positions = 0;
  long templates = 0;
  long length = 0;
  for (int e = 0; e < episodes; ++e) {
    const auto ue = static_cast<std::uint64_t>(e);
    DialogueContext ctx = env.reset(SeedStream::derive(seed, {0xE0, ue}));
    const UserState start = ctx.state;
    for (int t = 0; t < turns; ++t) {
      const auto ut = static_cast<std::uint64_t>(t);
      SeedStream sampler = SeedStream::derive(seed, {0xE1, ue, ut});
      const Observation obs = ctx.observation();
      const TokenSeq tokens = sample_sequence(world.policy, params, obs, max_action_len, sampler);
      const std::span<const TokenId> all(tokens);
      for (std::size_t k = 0; k < tokens.size(); ++k)
        entropy += world.policy.step(params, obs, all.first(k)).entropy();
      positions += static_cast<long>(tokens.size());
      length += static_cast<long>(tokens.size());
      const Rollout r =
          env.rollout(ctx, env.split_action(tokens), SeedStream::derive(seed, {0xE2, ue, ut}));
      if (r.strategy == env.template_empathy()) ++templates;
      s.mean_turn_outcome += env.true_outcome(r.context.state, r.post_state);
      env.advance(ctx, r);
    }
    s.mean_true_outcome += env.true_outcome(start, ctx.state);
    s.mean_end_distress += ctx.state.distress;
  }
  const double n_turns = static_cast<double>(episodes) * turns;
  s.mean_true_outcome /= episodes;
  s.mean_end_distress /= episodes;
  s.mean_turn_outcome /= n_turns;
  s.mean_entropy = entropy / static_cast<double>(positions);
  s.mean_length = static_cast<double>(length) / n_turns;
  s.template_rate = static_cast<double>(templates) / n_turns;
  return s;
}

}  // namespace rapo
