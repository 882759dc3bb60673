#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "common/rng.hpp"
#include "policy/policy.hpp"
#include "policy/vocabulary.hpp"

namespace rapo {

enum class ProblemKind { work, family, health };
inline constexpr int kNumProblemKinds = 3;
std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view name);

struct Persona {
  double openness = 0.5;
  double volatility = 0.5;
  ProblemKind problem_kind = ProblemKind::work;
  double advice_receptivity_threshold = 0.5;
};

// Hidden emotional state of the simulated user.
struct UserState {
  double distress = 0.0;
  double trust = 0.0;
  int template_fatigue = 0;
  int turn_index = 0;

  bool operator==(const UserState&) const = default;
};

struct DialogueContext {
  TokenSeq history;
  Persona persona;
  std::vector<std::uint8_t> flags;  // observable projection of the persona
  UserState state;                  // never part of the policy input

  Observation observation() const { return Observation{history, flags}; }
};

struct SupporterAction {
  TokenId strategy = -1;
  TokenSeq response;

  TokenSeq tokens() const;
  int length() const { return 1 + static_cast<int>(response.size()); }
};

// Which rulebook branches fired on a transition.
struct TransitionTrace {
  bool validated = false;         // VALIDATE matched the problem kind
  bool premature_advice = false;  // SUGGEST below the receptivity threshold
  bool template_used = false;
  bool template_penalty = false;  // TEMPLATE_EMPATHY with fatigue >= 1
};

struct Rollout {
  DialogueContext context;  // snapshot before the action
  TokenId strategy = -1;
  TokenSeq response;
  TokenSeq reaction;
  UserState post_state;
  int length = 0;
  TransitionTrace trace;

  SupporterAction action() const { return SupporterAction{strategy, response}; }
  TokenSeq action_tokens() const { return action().tokens(); }
};

struct EnvConstants {
  double question_trust_gain = 0.10;      // scaled by openness
  double validate_relief = 0.15;
  double premature_advice_distress = 0.10;  // scaled by volatility
  double advice_relief = 0.20;
  double template_trust_gain = 0.05;
  double template_fatigue_penalty = 0.05;  // scaled by fatigue

  double outcome_weight_distress = 0.7;
  double outcome_weight_trust = 0.3;

  double relief_threshold = 0.1;
  double open_up_threshold = 0.05;
  int disengage_fatigue = 2;

  bool reaction_noise = true;
  double noise_band = 0.02;

  double initial_distress_min = 0.6;
  double initial_distress_max = 0.9;
  double initial_trust_min = 0.1;
  double initial_trust_max = 0.4;
  double threshold_min = 0.3;
  double threshold_max = 0.7;
  double volatile_flag_cutoff = 0.5;

  void validate() const;
};

// Slack used when comparing state deltas against reaction thresholds, so
// that e.g. 0.35 - 0.30 registers as a 0.05 change.
inline constexpr double kDeltaTolerance = 1e-9;

// Scripted emotional-support world. All members are const and pure given
// the seed stream, so one instance may serve any number of workers.
class Environment {
 public:
  static constexpr int kNumFlags = 1 + kNumProblemKinds;

  explicit Environment(Vocabulary vocab, EnvConstants constants = {});

  const Vocabulary& vocab() const { return vocab_; }
  const EnvConstants& constants() const { return constants_; }

  DialogueContext reset(SeedStream stream) const;
  std::vector<std::uint8_t> observable_flags(const Persona& persona) const;

  UserState transition(const UserState& state, const Persona& persona,
                       const SupporterAction& action, TransitionTrace* trace = nullptr) const;

  struct Reaction {
    TokenSeq tokens;
    UserState post_state;
    TransitionTrace trace;
  };
  Reaction user_react(const DialogueContext& context, const SupporterAction& action,
                      SeedStream stream) const;

  double true_outcome(const UserState& pre, const UserState& post) const;

  Rollout rollout(const DialogueContext& context, const SupporterAction& action,
                  SeedStream stream) const;
  // Appends the rollout's action and reaction to the history and moves the
  // hidden state forward.
  void advance(DialogueContext& context, const Rollout& rollout) const;

  SupporterAction split_action(const TokenSeq& tokens) const;

  TokenId question() const { return question_; }
  TokenId validate() const { return validate_; }
  TokenId suggest() const { return suggest_; }
  TokenId template_empathy() const { return template_; }
  TokenId topic(ProblemKind kind) const { return topics_[static_cast<std::size_t>(kind)]; }
  TokenId vent(ProblemKind kind) const { return vents_[static_cast<std::size_t>(kind)]; }
  TokenId filler() const { return filler_; }
  TokenId relief() const { return relief_; }
  TokenId open_up() const { return open_up_; }
  TokenId disengage() const { return disengage_; }
  TokenId pushback() const { return pushback_; }
  TokenId neutral() const { return neutral_; }

 private:
  Vocabulary vocab_;
  EnvConstants constants_;
  TokenId question_, validate_, suggest_, template_, filler_;
  TokenId relief_, open_up_, disengage_, pushback_, neutral_;
  std::array<TokenId, kNumProblemKinds> topics_{};
  std::array<TokenId, kNumProblemKinds> vents_{};
};

}  // namespace rapo
