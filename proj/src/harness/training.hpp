#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "harness/config.hpp"
#include "harness/evaluation.hpp"

namespace rapo {

struct RunRecord {
  std::string config_hash;
  std::string corpus_hash;  // git blob hash of prompts.jsonl
  std::string metrics_path;
  std::string evaluations_path;
  std::string prompts_path;
  std::string params_path;
  std::int64_t steps = 0;
  EvalSummary initial_evaluation;
  EvalSummary final_evaluation;

  nlohmann::ordered_json to_json() const;
};

// Training context for (step, prompt): a fresh reset followed by up to
// warmup_max_turns scripted turns. With tau > 0 the context is kept only if
// the scripted turn that would follow it is pivotal at tau, mirroring
// hindsight selection over a synthesized corpus; up to kMaxContextDraws
// candidates are drawn before the last one is accepted as is.
inline constexpr int kMaxContextDraws = 16;
DialogueContext training_context(const World& world, const TrainConfig& cfg, std::int64_t step,
                                 int prompt);

// Full loop. Writes into out_dir: metrics.jsonl, evaluations.jsonl,
// prompts.jsonl, params.json and run_record.json. Component errors are
// rethrown with the failing step in the message.
RunRecord run_training(const TrainConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace rapo
