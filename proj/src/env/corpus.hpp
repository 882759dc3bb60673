#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "env/environment.hpp"

namespace rapo {

// Scripted supporter styles used to synthesize corpora and warm-up histories.
enum class Behavior { template_heavy, question_first, advice_rusher };
std::string_view to_string(Behavior b);
Behavior behavior_from_string(std::string_view name);

class BehaviorMix {
 public:
  BehaviorMix() = default;
  explicit BehaviorMix(std::vector<std::pair<Behavior, double>> weights);

  // "template_heavy=1,advice_rusher=0.5"; a bare name means weight 1.
  static BehaviorMix parse(std::string_view spec);
  static BehaviorMix uniform();

  Behavior pick(SeedStream& stream) const;
  const std::vector<std::pair<Behavior, double>>& weights() const { return weights_; }
  std::string to_string() const;

 private:
  std::vector<std::pair<Behavior, double>> weights_;
};

SupporterAction scripted_action(const Environment& env, Behavior behavior,
                                const DialogueContext& context, SeedStream& stream);

using CorpusRecord = nlohmann::ordered_json;

// One JSONL record per supporter turn:
// {dialogue_id, turn_index, context_tokens, strategy, response_tokens,
//  reaction_tokens, delta_distress, delta_trust, persona}
CorpusRecord make_corpus_record(const Environment& env, std::int64_t dialogue_id,
                                const Rollout& rollout);

struct CorpusSummary {
  std::int64_t dialogues = 0;
  std::int64_t turns = 0;
  double mean_final_fatigue = 0.0;
};

inline constexpr int kMinCorpusTurns = 4;
inline constexpr int kMaxCorpusTurns = 8;

CorpusSummary generate_corpus(const Environment& env, std::int64_t n_dialogues, std::uint64_t seed,
                              const BehaviorMix& mix, const std::filesystem::path& out);

}  // namespace rapo
