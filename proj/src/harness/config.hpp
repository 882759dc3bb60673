#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "env/environment.hpp"
#include "optim/config.hpp"
#include "policy/feature_map.hpp"
#include "reward/reward.hpp"

namespace rapo {

enum class RewardMode { grm, rubric };
std::string_view to_string(RewardMode m);
RewardMode reward_mode_from_string(std::string_view name);

struct EvalConfig {
  int episodes = 200;
  int turns = 6;
  std::uint64_t seed = 0xE7A1;
};

struct FeatureConfig {
  int window = 4;
  int position_buckets = 4;
  bool bias = true;
};

struct TrainConfig {
  EnvConstants env;
  std::string vocabulary = "standard";
  FeatureConfig feature_map;
  GrpoConfig grpo;
  SdpoConfig sdpo;
  RewardMode reward_mode = RewardMode::grm;
  bool sd_enabled = true;
  int steps = 300;
  double lr = 0.05;
  std::uint64_t master_seed = 1;
  int prompts_per_step = 8;
  // Hindsight filter on training contexts; 0 keeps every context.
  double tau = 0.0;
  int l_max = 200;
  int l_cache = 80;
  int max_action_len = 6;
  // Scripted turns played before a training context is handed to the policy.
  int warmup_max_turns = 3;
  // Strength of the built-in reading of critique codes in the initial
  // weights (see feedback_prior_params). 0 starts from all-zero weights.
  double feedback_prior = 0.0;
  EvalConfig eval;
  int threads = 1;

  void validate() const;
  LengthControl length() const { return LengthControl{l_max, l_cache}; }
  FeatureMapSpec feature_spec() const;
};

// Canonical form: fixed key order, every field present.
nlohmann::ordered_json config_to_json(const TrainConfig& cfg);
// Missing keys take defaults; unknown keys and wrong types are config errors.
TrainConfig config_from_json(const nlohmann::json& j);

TrainConfig load_config(const std::filesystem::path& path);
std::string canonical_config_text(const TrainConfig& cfg);
std::string config_hash(const TrainConfig& cfg);

// The four shipped ablation arms.
const std::vector<std::string>& preset_names();
TrainConfig preset(std::string_view name);

}  // namespace rapo
