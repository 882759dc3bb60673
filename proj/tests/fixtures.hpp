#pragma once

#include <vector>

#include "common/rng.hpp"
#include "env/environment.hpp"
#include "policy/policy.hpp"

namespace rapo::testing {

// Smallest admissible alphabet: 2 strategies, 2 content tokens (one is the
// terminator), a reaction, 2 critiques and the separator. V = 8.
inline Vocabulary tiny_vocab() {
  using R = TokenRole;
  return Vocabulary({{"S_A", R::strategy},
                     {"S_B", R::strategy},
                     {"C_X", R::content},
                     {"END", R::content},
                     {"R_N", R::reaction},
                     {"K_1", R::critique},
                     {"K_2", R::critique},
                     {"SEP", R::separator}},
                    "END");
}

inline PolicyParams random_params(int v, int d, SeedStream& s, double scale = 1.0,
                                  ParamTag tag = ParamTag::student) {
  PolicyParams p = PolicyParams::zeros(v, d, tag);
  for (Eigen::Index k = 0; k < p.weights.size(); ++k) p.weights.data()[k] = s.uniform(-scale, scale);
  return p;
}

inline SequencePolicy standard_policy(const Vocabulary& vocab, int window = 4) {
  return SequencePolicy(FeatureMap(vocab.size(), FeatureMapSpec{window, 4, Environment::kNumFlags, true}),
                        ActionGrammar::chain_of_supporting(vocab));
}

inline EnvConstants noiseless() {
  EnvConstants c;
  c.reaction_noise = false;
  return c;
}

// A rollout of the tiny grammar over an arbitrary observation.
inline Rollout tiny_rollout(const TokenSeq& history, const TokenSeq& action, int num_flags) {
  Rollout r;
  r.context.history = history;
  r.context.flags.assign(static_cast<std::size_t>(num_flags), 0);
  r.strategy = action.front();
  r.response.assign(action.begin() + 1, action.end());
  r.reaction = {4};
  r.length = static_cast<int>(action.size());
  return r;
}

}  // namespace rapo::testing
